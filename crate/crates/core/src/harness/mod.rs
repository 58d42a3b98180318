//! Scenario configuration, Monte Carlo driver and report files.

pub mod config;
pub mod report;
pub mod run;
pub mod seeds;

pub use config::{load_config, ScenarioConfig};
pub use report::{emit_reports, load_summary, load_trials};
pub use run::{aggregate, first_trial_channels, run_scenario, RunReport, RunSummary, TrialRecord, WaveformCase};
pub use seeds::SeedPlan;
