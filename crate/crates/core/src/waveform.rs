//! Radar baseband waveforms.
//!
//! The default family is exactly orthogonal: a seeded unit-modulus chip
//! sequence `c[n]` is spread across the `M_T` rows by the columns of the
//! `M_T`-point DFT matrix, cycling through one DFT column per sample:
//!
//! ```text
//! x_k[n] = c[n] · exp(-j 2π k (n mod M_T) / M_T)
//! ```
//!
//! Over every complete block of `M_T` samples the rows are orthogonal, so
//! `X X^H = N·I` whenever `N` is a multiple of `M_T`. A trailing partial block
//! is repaired by re-orthonormalising the rows.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, ComplexMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformFamily {
    /// DFT-spread chip sequence with `X X^H = N·I`.
    #[default]
    Orthogonal,
    /// Independent unit-modulus random-phase rows; only approximately
    /// orthogonal, so projection losses vary with the channel realisation.
    PseudoRandom,
}

/// `M_T × N` complex baseband samples at `sample_rate` Hz.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveformMatrix {
    samples: ComplexMatrix,
    sample_rate: f64,
}

impl WaveformMatrix {
    pub fn new(samples: ComplexMatrix, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(Error::invalid("waveform must have at least one row and one sample"));
        }
        if !all_finite(&samples) {
            return Err(Error::invalid("waveform contains non-finite samples"));
        }
        Ok(WaveformMatrix {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &ComplexMatrix {
        &self.samples
    }

    pub fn into_samples(self) -> ComplexMatrix {
        self.samples
    }

    pub fn num_tx(&self) -> usize {
        self.samples.nrows()
    }

    pub fn num_samples(&self) -> usize {
        self.samples.ncols()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Observation time `T_0 = N / B`.
    pub fn duration(&self) -> f64 {
        self.num_samples() as f64 / self.sample_rate
    }

    /// Mean `|x_k[n]|²` of each row.
    pub fn row_powers(&self) -> Vec<f64> {
        let n = self.num_samples() as f64;
        self.samples
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>() / n)
            .collect()
    }

    pub(crate) fn with_samples(&self, samples: ComplexMatrix) -> Self {
        WaveformMatrix {
            samples,
            sample_rate: self.sample_rate,
        }
    }
}

pub fn generate(
    family: WaveformFamily,
    num_tx: usize,
    num_samples: usize,
    sample_rate: f64,
    seed: u64,
) -> Result<WaveformMatrix> {
    match family {
        WaveformFamily::Orthogonal => generate_orthogonal(num_tx, num_samples, sample_rate, seed),
        WaveformFamily::PseudoRandom => generate_pseudo_random(num_tx, num_samples, sample_rate, seed),
    }
}

/// Exactly orthogonal, unit-power rows: `X X^H = N·I`.
pub fn generate_orthogonal(
    num_tx: usize,
    num_samples: usize,
    sample_rate: f64,
    seed: u64,
) -> Result<WaveformMatrix> {
    if num_tx == 0 {
        return Err(Error::invalid("num_tx must be >= 1"));
    }
    if num_samples < num_tx {
        return Err(Error::invalid(format!(
            "orthogonal waveform needs num_samples >= num_tx ({num_samples} < {num_tx})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chips: Vec<Complex64> = (0..num_samples)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
        .collect();

    let m = num_tx as f64;
    let mut x = ComplexMatrix::from_fn(num_tx, num_samples, |k, n| {
        let pos = (n % num_tx) as f64;
        chips[n] * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * pos / m)
    });
    if !num_samples.is_multiple_of(num_tx) {
        orthonormalize_rows(&mut x);
    }
    WaveformMatrix::new(x, sample_rate)
}

fn generate_pseudo_random(
    num_tx: usize,
    num_samples: usize,
    sample_rate: f64,
    seed: u64,
) -> Result<WaveformMatrix> {
    if num_tx == 0 || num_samples == 0 {
        return Err(Error::invalid("waveform dimensions must be nonzero"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = ComplexMatrix::from_fn(num_tx, num_samples, |_, _| {
        Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
    });
    WaveformMatrix::new(x, sample_rate)
}

/// Gram-Schmidt (twice) on the rows, each rescaled to norm `sqrt(N)`.
fn orthonormalize_rows(x: &mut ComplexMatrix) {
    let target = (x.ncols() as f64).sqrt();
    for k in 0..x.nrows() {
        for _ in 0..2 {
            for j in 0..k {
                let coef: Complex64 = x
                    .row(j)
                    .iter()
                    .zip(x.row(k).iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum::<Complex64>()
                    / (target * target);
                let rj = x.row(j).clone_owned();
                let mut rk = x.row_mut(k);
                rk -= rj * coef;
            }
        }
        let norm = x.row(k).norm();
        x.row_mut(k).scale_mut(target / norm);
    }
}

/// `R = T_s Σ_n x[n] x[n]^H`.
pub fn correlation_matrix(x: &WaveformMatrix) -> ComplexMatrix {
    let s = x.samples();
    let r = s * s.adjoint();
    crate::linalg::hermitian_part(&r).scale(x.sample_period())
}

/// Shift every row right by `delay_samples`, zero-filling the start.
pub fn delay_shift(x: &WaveformMatrix, delay_samples: usize) -> Result<WaveformMatrix> {
    let n = x.num_samples();
    if delay_samples >= n {
        return Err(Error::invalid(format!(
            "delay of {delay_samples} samples outside window of {n}"
        )));
    }
    let mut out = ComplexMatrix::zeros(x.num_tx(), n);
    out.columns_mut(delay_samples, n - delay_samples)
        .copy_from(&x.samples().columns(0, n - delay_samples));
    Ok(x.with_samples(out))
}
