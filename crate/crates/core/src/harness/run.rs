//! End-to-end Monte Carlo driver.
//!
//! One transmit waveform serves the whole run. Every trial draws a fresh
//! channel set, selects the best and worst channel on the (possibly
//! imperfect) CSI, and runs the three one-axis estimators for the original,
//! best-projected and worst-projected waveforms. Failures are recorded on the
//! trial and never abort the run.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{linspace_by_step, ScenarioConfig};
use super::seeds::{SeedPlan, TrialSeeds};
use crate::channel::{perturb_csi, sample_channel_set, ChannelSet};
use crate::echo::{add_noise, synthesize_echo};
use crate::error::{Error, Result};
use crate::estimator::{estimate_angle, estimate_delay, estimate_doppler, Axis, EstimationGrid, EstimationResult};
use crate::linalg::frobenius;
use crate::projection::{project_waveform, ProjectorDiagnostics};
use crate::selection::{select_channels, SelectionSummary};
use crate::waveform::{generate, WaveformMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformCase {
    Original,
    NspBest,
    NspWorst,
}

impl WaveformCase {
    pub const ALL: [WaveformCase; 3] = [WaveformCase::Original, WaveformCase::NspBest, WaveformCase::NspWorst];

    pub fn column_name(self) -> &'static str {
        match self {
            WaveformCase::Original => "obj_original",
            WaveformCase::NspBest => "obj_nsp_best",
            WaveformCase::NspWorst => "obj_nsp_worst",
        }
    }
}

/// True target parameters in the units used by the reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub angle_deg: f64,
    pub delay_samples: usize,
    pub delay_s: f64,
    pub doppler_hz: f64,
}

impl Truth {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        let delay_samples = cfg.true_delay();
        Truth {
            angle_deg: cfg.scene.angle_deg,
            delay_samples,
            delay_s: delay_samples as f64 / cfg.sample_rate(),
            doppler_hz: cfg.scene.doppler_hz(&cfg.array),
        }
    }
}

/// Estimates and surface peaks for one waveform case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseEstimates {
    pub theta_hat_deg: f64,
    pub delay_hat_samples: usize,
    pub doppler_hat_hz: f64,
    pub angle_best_index: usize,
    pub delay_best_index: usize,
    pub doppler_best_index: usize,
    pub angle_peak: f64,
    pub delay_peak: f64,
    pub doppler_peak: f64,
    /// Angle grid points dropped by the denominator guard.
    pub excluded_angle_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case: WaveformCase,
    pub estimates: Option<CaseEstimates>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seeds: TrialSeeds,
    pub selection: Option<SelectionSummary>,
    /// Diagnostics of every base station's projector, in `bs_id` order.
    pub projectors: Vec<ProjectorDiagnostics>,
    /// `‖H_best P_best X‖_F / (‖H_best‖_F ‖X‖_F)` for the channel the
    /// projector was built from.
    pub interference_ratio: Option<f64>,
    /// The same ratio against the true channel; differs from the above only
    /// under CSI error.
    pub true_interference_ratio: Option<f64>,
    pub cases: Vec<CaseRecord>,
    /// Set when the trial failed before estimation (e.g. no usable null space).
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn case(&self, case: WaveformCase) -> Option<&CaseEstimates> {
        self.cases
            .iter()
            .find(|c| c.case == case)
            .and_then(|c| c.estimates.as_ref())
    }

    pub fn failed(&self) -> bool {
        self.error.is_some() || self.cases.iter().any(|c| c.error.is_some())
    }
}

/// Absolute-error statistics for one parameter of one waveform case over the
/// trials where that case succeeded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterStats {
    pub count: usize,
    pub mean_abs_error: Option<f64>,
    pub median_abs_error: Option<f64>,
    pub mean_peak: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseAggregate {
    pub case: WaveformCase,
    pub angle_deg: ParameterStats,
    pub delay_samples: ParameterStats,
    pub doppler_hz: ParameterStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: ScenarioConfig,
    pub seeds: SeedPlan,
    pub truth: Truth,
    pub trials: usize,
    pub failed_trials: usize,
    pub aggregates: Vec<CaseAggregate>,
    /// How often each base station (index `bs_id − 1`) was chosen as best.
    pub best_selection_counts: Vec<usize>,
    pub worst_selection_counts: Vec<usize>,
    pub max_interference_ratio: Option<f64>,
    pub max_true_interference_ratio: Option<f64>,
    pub timing: Timing,
}

/// One axis of trial-averaged objective values.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceTable {
    pub axis: Axis,
    /// Degrees, seconds or Hz.
    pub grid: Vec<f64>,
    /// One column per [`WaveformCase::ALL`] entry; `NaN` where no trial
    /// produced a value.
    pub columns: [Vec<f64>; 3],
}

/// Objective surfaces of a single trial, `[case][axis]`, `NaN` = excluded.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSurfaces {
    pub trial: usize,
    pub values: [[Vec<f64>; 3]; 3],
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub trials: Vec<TrialRecord>,
    pub summary: RunSummary,
    /// Angle, delay and Doppler surfaces, in that order.
    pub surfaces: [SurfaceTable; 3],
    /// Filled only when per-trial surfaces were requested.
    pub per_trial_surfaces: Vec<TrialSurfaces>,
    /// Filled only when a waveform dump was requested.
    pub waveform: Option<WaveformMatrix>,
}

struct Context<'a> {
    cfg: &'a ScenarioConfig,
    grid: EstimationGrid,
    truth: Truth,
    waveform: WaveformMatrix,
    fixed_channels: Option<ChannelSet>,
    plan: SeedPlan,
}

type CaseSurfaces = [Vec<f64>; 3];

fn surface_values(r: &EstimationResult) -> Vec<f64> {
    r.objective.iter().map(|v| v.unwrap_or(f64::NAN)).collect()
}

fn nan_surfaces(grid: &EstimationGrid) -> CaseSurfaces {
    [
        vec![f64::NAN; grid.angles_rad.len()],
        vec![f64::NAN; grid.delays.len()],
        vec![f64::NAN; grid.dopplers_hz.len()],
    ]
}

/// The channel set of a trial: the imported one, or a fresh draw.
pub fn trial_channels(cfg: &ScenarioConfig, seeds: &TrialSeeds, fixed: Option<&ChannelSet>) -> Result<ChannelSet> {
    match fixed {
        Some(set) => Ok(set.clone()),
        None => sample_channel_set(cfg.array.num_tx, &cfg.channels.rx_antennas_per_bs, seeds.channels),
    }
}

fn load_fixed_channels(cfg: &ScenarioConfig) -> Result<Option<ChannelSet>> {
    let Some(path) = &cfg.channels.import_path else {
        return Ok(None);
    };
    let set = ChannelSet::load_json(path)?;
    if set.num_tx() != cfg.array.num_tx {
        return Err(Error::Config {
            path: "channels.import_path".into(),
            message: format!(
                "imported channels have {} transmit columns, the array has {}",
                set.num_tx(),
                cfg.array.num_tx
            ),
        });
    }
    Ok(Some(set))
}

fn run_case(ctx: &Context, xref: &WaveformMatrix, noise_seed: u64) -> Result<(CaseEstimates, CaseSurfaces)> {
    let cfg = ctx.cfg;
    let y = synthesize_echo(&cfg.scene, &cfg.array, xref)?;
    let y = add_noise(&y, cfg.noise.effective_snr_db(), noise_seed)?;
    let theta = cfg.scene.angle_rad();
    let d = ctx.truth.delay_samples;
    let f = ctx.truth.doppler_hz;

    let angle = estimate_angle(&y, xref, d, f, &ctx.grid.angles_rad, &cfg.array)?;
    let delay = estimate_delay(&y, xref, theta, f, &ctx.grid.delays, &cfg.array)?;
    let doppler = estimate_doppler(&y, xref, theta, d, &ctx.grid.dopplers_hz, &cfg.array)?;

    let estimates = CaseEstimates {
        theta_hat_deg: angle.estimate.to_degrees(),
        delay_hat_samples: ctx.grid.delays[delay.best_index],
        doppler_hat_hz: doppler.estimate,
        angle_best_index: angle.best_index,
        delay_best_index: delay.best_index,
        doppler_best_index: doppler.best_index,
        angle_peak: angle.peak,
        delay_peak: delay.peak,
        doppler_peak: doppler.peak,
        excluded_angle_points: angle.excluded().len(),
    };
    let surfaces = [surface_values(&angle), surface_values(&delay), surface_values(&doppler)];
    Ok((estimates, surfaces))
}

fn interference_ratio(h: &crate::linalg::ComplexMatrix, px: &WaveformMatrix, x: &WaveformMatrix) -> f64 {
    frobenius(&(h * px.samples())) / (frobenius(h) * frobenius(x.samples()))
}

fn run_trial(ctx: &Context, trial: usize) -> (TrialRecord, [CaseSurfaces; 3]) {
    let seeds = ctx.plan.trial(trial);
    let mut record = TrialRecord {
        trial,
        seeds,
        selection: None,
        projectors: Vec::new(),
        interference_ratio: None,
        true_interference_ratio: None,
        cases: Vec::new(),
        error: None,
    };
    let empty = || [nan_surfaces(&ctx.grid), nan_surfaces(&ctx.grid), nan_surfaces(&ctx.grid)];

    let prepared = (|| -> Result<_> {
        let truth_set = trial_channels(ctx.cfg, &seeds, ctx.fixed_channels.as_ref())?;
        let csi = perturb_csi(&truth_set, ctx.cfg.channels.csi_error_std, seeds.csi_error)?;
        let sel = select_channels(&ctx.waveform, &csi, ctx.cfg.channels.rank_tolerance)?;
        Ok((truth_set, csi, sel))
    })();
    let (truth_set, csi, sel) = match prepared {
        Ok(p) => p,
        Err(e) => {
            record.error = Some(e.to_string());
            return (record, empty());
        }
    };

    record.selection = Some(sel.summary());
    record.projectors = sel
        .projectors
        .iter()
        .zip(csi.channels())
        .map(|(p, h)| p.diagnostics(h))
        .collect();

    let projected = [&sel.best_projector, &sel.worst_projector].map(|p| project_waveform(p, &ctx.waveform));
    let (best, worst) = match projected {
        [Ok(b), Ok(w)] => (b, w),
        [Err(e), _] | [_, Err(e)] => {
            record.error = Some(e.to_string());
            return (record, empty());
        }
    };
    let h_est = &csi.channels()[sel.best_index].matrix;
    let h_true = &truth_set.channels()[sel.best_index].matrix;
    record.interference_ratio = Some(interference_ratio(h_est, &best, &ctx.waveform));
    record.true_interference_ratio = Some(interference_ratio(h_true, &best, &ctx.waveform));

    let refs = [&ctx.waveform, &best, &worst];
    let mut surfaces = empty();
    for (slot, (case, xref)) in WaveformCase::ALL.iter().zip(refs).enumerate() {
        match run_case(ctx, xref, seeds.noise) {
            Ok((estimates, s)) => {
                surfaces[slot] = s;
                record.cases.push(CaseRecord {
                    case: *case,
                    estimates: Some(estimates),
                    error: None,
                });
            }
            Err(e) => record.cases.push(CaseRecord {
                case: *case,
                estimates: None,
                error: Some(e.to_string()),
            }),
        }
    }
    (record, surfaces)
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Median; the mean of the two central values for even counts.
pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 { s[m] } else { 0.5 * (s[m - 1] + s[m]) })
}

fn stats(errors: Vec<f64>, peaks: Vec<f64>) -> ParameterStats {
    ParameterStats {
        count: errors.len(),
        mean_abs_error: mean(&errors),
        median_abs_error: median(&errors),
        mean_peak: mean(&peaks),
    }
}

/// Aggregate statistics from per-trial records, in trial order.
pub fn aggregate(trials: &[TrialRecord], truth: &Truth) -> Vec<CaseAggregate> {
    WaveformCase::ALL
        .iter()
        .map(|&case| {
            let est: Vec<&CaseEstimates> = trials.iter().filter_map(|t| t.case(case)).collect();
            let collect = |f: &dyn Fn(&CaseEstimates) -> f64| est.iter().map(|e| f(e)).collect::<Vec<f64>>();
            CaseAggregate {
                case,
                angle_deg: stats(
                    collect(&|e| (e.theta_hat_deg - truth.angle_deg).abs()),
                    collect(&|e| e.angle_peak),
                ),
                delay_samples: stats(
                    collect(&|e| e.delay_hat_samples.abs_diff(truth.delay_samples) as f64),
                    collect(&|e| e.delay_peak),
                ),
                doppler_hz: stats(
                    collect(&|e| (e.doppler_hat_hz - truth.doppler_hz).abs()),
                    collect(&|e| e.doppler_peak),
                ),
            }
        })
        .collect()
}

fn selection_counts(trials: &[TrialRecord], num_bs: usize, pick: fn(&SelectionSummary) -> usize) -> Vec<usize> {
    let mut counts = vec![0; num_bs];
    for s in trials.iter().filter_map(|t| t.selection.as_ref()) {
        let id = pick(s);
        if id >= 1 && id <= num_bs {
            counts[id - 1] += 1;
        }
    }
    counts
}

fn max_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

/// Mean of the finite entries at each grid point, in trial order.
fn average_surfaces(per_trial: &[[CaseSurfaces; 3]], case: usize, axis: usize, len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let vals: Vec<f64> = per_trial
                .iter()
                .map(|s| s[case][axis][i])
                .filter(|v| v.is_finite())
                .collect();
            mean(&vals).unwrap_or(f64::NAN)
        })
        .collect()
}

/// Execute every trial of a validated scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport> {
    cfg.validate()?;
    let started = Instant::now();
    let plan = SeedPlan::new(cfg);
    let grid = cfg.estimation_grid()?;
    let waveform = generate(
        cfg.waveform.family,
        cfg.array.num_tx,
        cfg.num_samples(),
        cfg.sample_rate(),
        plan.waveform,
    )?;
    let ctx = Context {
        cfg,
        truth: Truth::new(cfg),
        fixed_channels: load_fixed_channels(cfg)?,
        grid,
        waveform,
        plan,
    };

    let outputs: Vec<(TrialRecord, [CaseSurfaces; 3])> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(&ctx, t)).collect();
    let (trials, per_trial): (Vec<TrialRecord>, Vec<[CaseSurfaces; 3]>) = outputs.into_iter().unzip();

    let g = &cfg.grids;
    let export_grids: [Vec<f64>; 3] = [
        linspace_by_step(g.angle.start_deg, g.angle.stop_deg, g.angle.step_deg)?,
        ctx.grid.delays.iter().map(|&d| d as f64 / cfg.sample_rate()).collect(),
        ctx.grid.dopplers_hz.clone(),
    ];
    let axes = [Axis::Angle, Axis::Delay, Axis::Doppler];
    let surfaces = [0, 1, 2].map(|a| {
        let len = export_grids[a].len();
        SurfaceTable {
            axis: axes[a],
            grid: export_grids[a].clone(),
            columns: [0, 1, 2].map(|c| average_surfaces(&per_trial, c, a, len)),
        }
    });

    let num_bs = ctx
        .fixed_channels
        .as_ref()
        .map_or(cfg.channels.rx_antennas_per_bs.len(), ChannelSet::len);
    let summary = RunSummary {
        config: cfg.clone(),
        seeds: plan,
        truth: ctx.truth.clone(),
        trials: trials.len(),
        failed_trials: trials.iter().filter(|t| t.failed()).count(),
        aggregates: aggregate(&trials, &ctx.truth),
        best_selection_counts: selection_counts(&trials, num_bs, |s| s.best_bs_id),
        worst_selection_counts: selection_counts(&trials, num_bs, |s| s.worst_bs_id),
        max_interference_ratio: max_of(trials.iter().filter_map(|t| t.interference_ratio)),
        max_true_interference_ratio: max_of(trials.iter().filter_map(|t| t.true_interference_ratio)),
        timing: Timing {
            wall_seconds: started.elapsed().as_secs_f64(),
        },
    };

    let per_trial_surfaces = if cfg.output.per_trial_surfaces {
        per_trial
            .into_iter()
            .enumerate()
            .map(|(trial, values)| TrialSurfaces { trial, values })
            .collect()
    } else {
        Vec::new()
    };

    Ok(RunReport {
        trials,
        summary,
        surfaces,
        per_trial_surfaces,
        waveform: cfg.output.dump_waveform.then_some(ctx.waveform),
    })
}

/// The channel set the first trial of `cfg` would use.
pub fn first_trial_channels(cfg: &ScenarioConfig) -> Result<ChannelSet> {
    cfg.validate()?;
    let plan = SeedPlan::new(cfg);
    let fixed = load_fixed_channels(cfg)?;
    trial_channels(cfg, &plan.trial(0), fixed.as_ref())
}
