//! Single point-target echo at the radar receive array.
//!
//! `y[n] = α · exp(−j ω_D n T_s) · A(θ) · x[:, n − d]`, with `d` the two-way
//! delay snapped to the nearest sample and `α = |α| exp(−j ω_c τ_r)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::array::{steering_matrix, ArrayConfig};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, ComplexMatrix};
use crate::waveform::{delay_shift, WaveformMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetScene {
    pub angle_deg: f64,
    pub range_m: f64,
    pub radial_velocity_mps: f64,
    #[serde(default = "unit")]
    pub reflection_magnitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl TargetScene {
    /// `θ = 0°`, `r_0 = 5000 m`, `v_r = 2000 m/s`, `|α| = 1`.
    pub fn table1() -> Self {
        TargetScene {
            angle_deg: 0.0,
            range_m: 5000.0,
            radial_velocity_mps: 2000.0,
            reflection_magnitude: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.angle_deg.is_nan() || self.angle_deg.abs() > 90.0 {
            return Err(Error::invalid("target angle must lie in [-90, 90] degrees"));
        }
        if !(self.range_m > 0.0 && self.range_m.is_finite()) {
            return Err(Error::invalid("target range must be positive"));
        }
        if !self.radial_velocity_mps.is_finite() {
            return Err(Error::invalid("radial velocity must be finite"));
        }
        if !(self.reflection_magnitude > 0.0 && self.reflection_magnitude.is_finite()) {
            return Err(Error::invalid("reflection magnitude must be positive"));
        }
        Ok(())
    }

    pub fn angle_rad(&self) -> f64 {
        self.angle_deg.to_radians()
    }

    /// `τ_r = 2 r_0 / c`.
    pub fn delay_s(&self, cfg: &ArrayConfig) -> f64 {
        2.0 * self.range_m / cfg.propagation_speed_mps
    }

    /// `τ_r · B`, rounded to the nearest sample.
    pub fn delay_samples(&self, cfg: &ArrayConfig, sample_rate: f64) -> usize {
        (self.delay_s(cfg) * sample_rate).round() as usize
    }

    /// `f_d = 2 v_r / λ`.
    pub fn doppler_hz(&self, cfg: &ArrayConfig) -> f64 {
        2.0 * self.radial_velocity_mps / cfg.wavelength()
    }

    /// `ω_D = 2 ω_c v_r / c = 2π f_d`.
    pub fn doppler_rad_s(&self, cfg: &ArrayConfig) -> f64 {
        2.0 * std::f64::consts::PI * self.doppler_hz(cfg)
    }
}

/// `M_R × N` received samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedEcho {
    samples: ComplexMatrix,
    sample_rate: f64,
    /// Columns carrying target signal, `d..N`; the noise reference.
    signal_start: usize,
}

impl ReceivedEcho {
    pub fn new(samples: ComplexMatrix, sample_rate: f64) -> Result<Self> {
        if !all_finite(&samples) {
            return Err(Error::invalid("echo contains non-finite samples"));
        }
        Ok(ReceivedEcho {
            samples,
            sample_rate,
            signal_start: 0,
        })
    }

    pub fn samples(&self) -> &ComplexMatrix {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn num_samples(&self) -> usize {
        self.samples.ncols()
    }

    pub fn num_rx(&self) -> usize {
        self.samples.nrows()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        ReceivedEcho {
            samples: self.samples.map(|z| z * factor),
            ..self.clone()
        }
    }
}

/// `α = |α| exp(−j ω_c τ_r)`.
pub fn path_loss_alpha(scene: &TargetScene, cfg: &ArrayConfig) -> Complex64 {
    Complex64::from_polar(
        scene.reflection_magnitude,
        -cfg.angular_carrier() * scene.delay_s(cfg),
    )
}

pub fn synthesize_echo(scene: &TargetScene, cfg: &ArrayConfig, x: &WaveformMatrix) -> Result<ReceivedEcho> {
    if x.num_tx() != cfg.num_tx {
        return Err(Error::invalid(format!(
            "waveform has {} rows but the array has {} transmit elements",
            x.num_tx(),
            cfg.num_tx
        )));
    }
    let d = scene.delay_samples(cfg, x.sample_rate());
    if d >= x.num_samples() {
        return Err(Error::invalid(format!(
            "target delay of {d} samples lies outside the {}-sample window",
            x.num_samples()
        )));
    }
    let shifted = delay_shift(x, d)?;
    let a = steering_matrix(cfg, scene.angle_rad());
    let alpha = path_loss_alpha(scene, cfg);
    let step = -scene.doppler_rad_s(cfg) * x.sample_period();

    let mut y = a * shifted.samples();
    for (n, mut col) in y.column_iter_mut().enumerate() {
        // Phase reduced mod 2π before exponentiating keeps long windows exact.
        let phase = (step * n as f64) % std::f64::consts::TAU;
        col *= alpha * Complex64::from_polar(1.0, phase);
    }
    Ok(ReceivedEcho {
        samples: y,
        sample_rate: x.sample_rate(),
        signal_start: d,
    })
}

/// Add circular complex white Gaussian noise so that signal energy over the
/// target-bearing columns divided by noise energy over the same columns is
/// `10^(snr_db/10)` in expectation. `snr_db = +∞` returns the echo unchanged.
pub fn add_noise(y: &ReceivedEcho, snr_db: f64, seed: u64) -> Result<ReceivedEcho> {
    if snr_db == f64::INFINITY {
        return Ok(y.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid("snr_db must be finite (or +inf for noiseless)"));
    }
    let cols = y.num_samples() - y.signal_start;
    let entries = (cols * y.num_rx()) as f64;
    let signal_energy: f64 = y
        .samples
        .columns(y.signal_start, cols)
        .iter()
        .map(|z| z.norm_sqr())
        .sum();
    let noise_var = signal_energy / entries / 10f64.powf(snr_db / 10.0);
    let s = (noise_var / 2.0).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = y.samples.map(|z| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        z + Complex64::new(s * re, s * im)
    });
    Ok(ReceivedEcho {
        samples,
        ..y.clone()
    })
}
