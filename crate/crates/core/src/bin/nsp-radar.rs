//! Command-line front end for the radar/cellular coexistence simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nsp_radar::harness::{emit_reports, first_trial_channels, load_config, run_scenario, ScenarioConfig};
use nsp_radar::Result;

#[derive(Parser)]
#[command(name = "nsp-radar", version, about = "MIMO radar null-space projection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write surfaces_*.csv, trials.json and summary.json.
    Run {
        config: PathBuf,
        /// Override the number of Monte Carlo trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (defaults to the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Disable receiver noise.
        #[arg(long)]
        noiseless: bool,
        /// Sweep only a window of delays around the true target delay.
        #[arg(long)]
        fast_grids: bool,
    },
    /// Parse and validate a scenario file, then print it with defaults filled.
    Validate { config: PathBuf },
    /// Write the channel set of the scenario's first trial as JSON.
    ExportChannels { config: PathBuf, out: PathBuf },
}

fn apply_overrides(
    cfg: &mut ScenarioConfig,
    trials: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    noiseless: bool,
    fast_grids: bool,
) -> Result<()> {
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    if noiseless {
        cfg.noise.noiseless = true;
    }
    if fast_grids {
        cfg.use_fast_grids();
    }
    cfg.validate()
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            trials,
            seed,
            out,
            noiseless,
            fast_grids,
        } => {
            let mut cfg = load_config(&config)?;
            apply_overrides(&mut cfg, trials, seed, out, noiseless, fast_grids)?;
            let report = run_scenario(&cfg)?;
            let written = emit_reports(&report, &cfg.output_dir)?;
            let s = &report.summary;
            eprintln!(
                "{} trials ({} with failures) in {:.2} s",
                s.trials, s.failed_trials, s.timing.wall_seconds
            );
            for agg in &s.aggregates {
                eprintln!(
                    "  {:<10} median |angle err| {} deg, |delay err| {} samples, |doppler err| {} Hz",
                    format!("{:?}", agg.case),
                    fmt_opt(agg.angle_deg.median_abs_error),
                    fmt_opt(agg.delay_samples.median_abs_error),
                    fmt_opt(agg.doppler_hz.median_abs_error),
                );
            }
            for path in written {
                println!("{}", path.display());
            }
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            println!("{}", cfg.to_json_string());
        }
        Command::ExportChannels { config, out } => {
            let cfg = load_config(&config)?;
            first_trial_channels(&cfg)?.save_json(&out)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.4}"))
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
