//! Scenario configuration: a JSON document with one section per concern.
//!
//! Only `array` is required; every other section and key falls back to the
//! default scenario (heterogeneous base stations, noiseless echo, standard
//! grids). Unknown keys are rejected with the offending path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::array::ArrayConfig;
use crate::echo::TargetScene;
use crate::error::{Error, Result};
use crate::estimator::EstimationGrid;
use crate::projection::DEFAULT_RANK_TOLERANCE;
use crate::waveform::WaveformFamily;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub array: ArrayConfig,
    #[serde(default)]
    pub waveform: WaveformConfig,
    #[serde(default)]
    pub channels: ChannelsConfig,
    #[serde(default = "TargetScene::table1")]
    pub scene: TargetScene,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub grids: GridsConfig,
    /// Master seed; every per-concern seed not given explicitly derives from it.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    20_190_101
}

fn default_trials() -> usize {
    100
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs/latest")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveformConfig {
    pub family: WaveformFamily,
    pub bandwidth_hz: f64,
    pub observation_time_s: f64,
    /// Overrides `round(bandwidth_hz · observation_time_s)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        WaveformConfig {
            family: WaveformFamily::Orthogonal,
            bandwidth_hz: 10e6,
            observation_time_s: 1e-3,
            num_samples: None,
            seed: None,
        }
    }
}

impl WaveformConfig {
    /// Sample rate; complex baseband sampling at the bandwidth.
    pub fn sample_rate(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn num_samples(&self) -> usize {
        self.num_samples
            .unwrap_or_else(|| (self.bandwidth_hz * self.observation_time_s).round() as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelsConfig {
    /// Receive antennas of each base station; its length is the number of
    /// base stations, listed in `bs_id` order.
    pub rx_antennas_per_bs: Vec<usize>,
    /// Standard deviation of the CSI error added before selection.
    pub csi_error_std: f64,
    pub rank_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Use this fixed channel set in every trial instead of drawing fresh ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub import_path: Option<PathBuf>,
}

impl Default for ChannelsConfig {
    fn default() -> Self {
        ChannelsConfig {
            rx_antennas_per_bs: vec![2, 4, 6, 8],
            csi_error_std: 0.0,
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
            seed: None,
            import_path: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub noiseless: bool,
    pub snr_db: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            noiseless: true,
            snr_db: 10.0,
            seed: None,
        }
    }
}

impl NoiseConfig {
    /// SNR handed to the noise generator; `+∞` when noiseless.
    pub fn effective_snr_db(&self) -> f64 {
        if self.noiseless {
            f64::INFINITY
        } else {
            self.snr_db
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridsConfig {
    pub angle: AngleGrid,
    pub delay: DelayGrid,
    pub doppler: DopplerGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AngleGrid {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl Default for AngleGrid {
    fn default() -> Self {
        AngleGrid {
            start_deg: -90.0,
            stop_deg: 90.0,
            step_deg: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayMode {
    /// Every sample index of the observation window.
    #[default]
    Full,
    /// `half_width` samples either side of the true delay.
    Window,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DelayGrid {
    pub mode: DelayMode,
    pub half_width: usize,
}

impl Default for DelayGrid {
    fn default() -> Self {
        DelayGrid {
            mode: DelayMode::Full,
            half_width: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DopplerGrid {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub step_hz: f64,
}

impl Default for DopplerGrid {
    fn default() -> Self {
        DopplerGrid {
            start_hz: 0.0,
            stop_hz: 100e3,
            step_hz: 100.0,
        }
    }
}

/// Optional, potentially large outputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Write every trial's surfaces next to the trial-averaged ones.
    pub per_trial_surfaces: bool,
    /// Write the transmit waveform as `waveform.csv`.
    pub dump_waveform: bool,
}

/// Evenly spaced points from `start` to `stop` inclusive. The span must be a
/// whole number of steps; points are computed as `start + span·i/(n−1)` so
/// both end points and any exactly representable interior point land exactly.
pub fn linspace_by_step(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::invalid("grid bounds and step must be finite"));
    }
    if step <= 0.0 {
        return Err(Error::invalid("grid step must be positive"));
    }
    if stop < start {
        return Err(Error::invalid("grid stop lies below start"));
    }
    let steps = (stop - start) / step;
    let whole = steps.round();
    if (steps - whole).abs() > 1e-9 * whole.max(1.0) {
        return Err(Error::invalid(format!(
            "grid span {} is not a whole number of {step} steps",
            stop - start
        )));
    }
    let intervals = whole as usize;
    if intervals == 0 {
        return Ok(vec![start]);
    }
    let span = stop - start;
    Ok((0..=intervals)
        .map(|i| start + span * i as f64 / intervals as f64)
        .collect())
}

impl ScenarioConfig {
    /// The default scenario for the given array.
    pub fn with_array(array: ArrayConfig) -> Self {
        ScenarioConfig {
            array,
            waveform: WaveformConfig::default(),
            channels: ChannelsConfig::default(),
            scene: TargetScene::table1(),
            noise: NoiseConfig::default(),
            grids: GridsConfig::default(),
            seed: default_seed(),
            trials: default_trials(),
            output_dir: default_output_dir(),
            output: OutputConfig::default(),
        }
    }

    /// The built-in radar scenario: ten transmit and seven receive elements
    /// at 3.55 GHz, 10 MHz bandwidth, 1 ms observation, a target at 0°,
    /// 5 km and 2 km/s, four base stations with 2, 4, 6 and 8 antennas.
    pub fn table1() -> Self {
        Self::with_array(ArrayConfig::table1())
    }

    /// Parse a JSON document and validate it.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config {
                path,
                message: e.into_inner().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn sample_rate(&self) -> f64 {
        self.waveform.sample_rate()
    }

    pub fn num_samples(&self) -> usize {
        self.waveform.num_samples()
    }

    /// True two-way delay in samples.
    pub fn true_delay(&self) -> usize {
        self.scene.delay_samples(&self.array, self.sample_rate())
    }

    /// Switch the delay sweep to the window around the true delay.
    pub fn use_fast_grids(&mut self) {
        self.grids.delay.mode = DelayMode::Window;
    }

    /// Materialize the three sweep grids (angles in radians).
    pub fn estimation_grid(&self) -> Result<EstimationGrid> {
        let g = &self.grids;
        let angles_rad = linspace_by_step(g.angle.start_deg, g.angle.stop_deg, g.angle.step_deg)?
            .into_iter()
            .map(f64::to_radians)
            .collect();
        let n = self.num_samples();
        let delays = match g.delay.mode {
            DelayMode::Full => (0..n).collect(),
            DelayMode::Window => {
                let d = self.true_delay();
                let lo = d.saturating_sub(g.delay.half_width);
                let hi = (d + g.delay.half_width).min(n.saturating_sub(1));
                (lo..=hi).collect()
            }
        };
        let dopplers_hz = linspace_by_step(g.doppler.start_hz, g.doppler.stop_hz, g.doppler.step_hz)?;
        let grid = EstimationGrid {
            angles_rad,
            delays,
            dopplers_hz,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Check every section, reporting all problems at once with their paths.
    pub fn validate(&self) -> Result<()> {
        let mut problems: Vec<(String, String)> = Vec::new();
        let mut push = |path: &str, msg: String| problems.push((path.to_string(), msg));

        if let Err(e) = self.array.validate() {
            push("array", e.to_string());
        }
        if let Err(e) = self.scene.validate() {
            push("scene", e.to_string());
        }

        let w = &self.waveform;
        if !(w.bandwidth_hz > 0.0 && w.bandwidth_hz.is_finite()) {
            push("waveform.bandwidth_hz", "must be positive".into());
        }
        if !(w.observation_time_s > 0.0 && w.observation_time_s.is_finite()) {
            push("waveform.observation_time_s", "must be positive".into());
        }
        let n = w.num_samples();
        if n < self.array.num_tx {
            push(
                "waveform.num_samples",
                format!("{n} samples cannot carry {} orthogonal rows", self.array.num_tx),
            );
        }

        let c = &self.channels;
        if c.import_path.is_none() {
            if c.rx_antennas_per_bs.is_empty() {
                push("channels.rx_antennas_per_bs", "at least one base station is required".into());
            }
            if let Some(i) = c.rx_antennas_per_bs.iter().position(|&r| r == 0) {
                push(
                    &format!("channels.rx_antennas_per_bs[{i}]"),
                    "antenna count must be >= 1".into(),
                );
            }
        }
        if !(c.csi_error_std >= 0.0 && c.csi_error_std.is_finite()) {
            push("channels.csi_error_std", "must be finite and nonnegative".into());
        }
        if !(c.rank_tolerance > 0.0 && c.rank_tolerance < 1.0) {
            push("channels.rank_tolerance", "must lie in (0, 1)".into());
        }

        if !self.noise.noiseless && !self.noise.snr_db.is_finite() {
            push("noise.snr_db", "must be finite unless noiseless".into());
        }

        let g = &self.grids;
        if let Err(e) = linspace_by_step(g.angle.start_deg, g.angle.stop_deg, g.angle.step_deg) {
            push("grids.angle", e.to_string());
        }
        if g.angle.start_deg < -90.0 || g.angle.stop_deg > 90.0 {
            push("grids.angle", "angles must lie in [-90, 90] degrees".into());
        }
        if let Err(e) = linspace_by_step(g.doppler.start_hz, g.doppler.stop_hz, g.doppler.step_hz) {
            push("grids.doppler", e.to_string());
        }
        if self.scene.validate().is_ok() && w.bandwidth_hz > 0.0 && self.true_delay() >= n {
            push(
                "scene.range_m",
                format!("target delay of {} samples exceeds the {n}-sample window", self.true_delay()),
            );
        }

        if self.trials == 0 {
            push("trials", "must be >= 1".into());
        }

        if problems.is_empty() {
            return Ok(());
        }
        let path = problems
            .iter()
            .map(|(p, _)| p.as_str())
            .collect::<Vec<_>>()
            .join(", ");
        let message = problems
            .iter()
            .map(|(p, m)| format!("{p}: {m}"))
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::Config { path, message })
    }
}

/// Read, parse and validate a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioConfig::from_json_str(&text)
}
