//! Colocated uniform linear array geometry and steering vectors.
//!
//! Transmit and receive arrays share one axis and one phase reference (the
//! first element). Angles are measured from broadside in `[-π/2, π/2]`, and
//! element `k` (zero-based) sees the far-field delay `k·d·sin θ / c`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub num_tx: usize,
    pub num_rx: usize,
    pub element_spacing_m: f64,
    pub carrier_freq_hz: f64,
    pub propagation_speed_mps: f64,
    /// Overrides `c / f_c` when set. Steering phases and Doppler are then
    /// evaluated on this wavelength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength_m: Option<f64>,
}

impl ArrayConfig {
    /// `M_T = 10`, `M_R = 7`, `f_c = 3.55 GHz`, `λ = 8.5 cm`, `d = 6.42 cm`.
    pub fn table1() -> Self {
        ArrayConfig {
            num_tx: 10,
            num_rx: 7,
            element_spacing_m: 0.0642,
            carrier_freq_hz: 3.55e9,
            propagation_speed_mps: 3.0e8,
            wavelength_m: Some(0.085),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::invalid(format!("array config: {what}")));
        if self.num_tx == 0 {
            return bad("num_tx must be >= 1");
        }
        if self.num_rx == 0 {
            return bad("num_rx must be >= 1");
        }
        if !(self.element_spacing_m > 0.0 && self.element_spacing_m.is_finite()) {
            return bad("element_spacing_m must be positive");
        }
        if !(self.carrier_freq_hz > 0.0 && self.carrier_freq_hz.is_finite()) {
            return bad("carrier_freq_hz must be positive");
        }
        if !(self.propagation_speed_mps > 0.0 && self.propagation_speed_mps.is_finite()) {
            return bad("propagation_speed_mps must be positive");
        }
        if let Some(w) = self.wavelength_m {
            if !(w > 0.0 && w.is_finite()) {
                return bad("wavelength_m must be positive");
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength_m
            .unwrap_or(self.propagation_speed_mps / self.carrier_freq_hz)
    }

    /// `ω_c`, consistent with [`Self::wavelength`]: `2π c / λ`.
    pub fn angular_carrier(&self) -> f64 {
        2.0 * PI * self.propagation_speed_mps / self.wavelength()
    }

    /// Far-field delay of element `k` relative to element 0.
    pub fn element_delay(&self, k: usize, theta: f64) -> f64 {
        k as f64 * self.element_spacing_m * theta.sin() / self.propagation_speed_mps
    }

    fn steering(&self, len: usize, theta: f64) -> ComplexVector {
        let wc = self.angular_carrier();
        ComplexVector::from_fn(len, |k, _| {
            Complex64::from_polar(1.0, -wc * self.element_delay(k, theta))
        })
    }
}

/// `a_T(θ)`, length `M_T`.
pub fn tx_steering(cfg: &ArrayConfig, theta: f64) -> ComplexVector {
    cfg.steering(cfg.num_tx, theta)
}

/// `a_R(θ)`, length `M_R`.
pub fn rx_steering(cfg: &ArrayConfig, theta: f64) -> ComplexVector {
    cfg.steering(cfg.num_rx, theta)
}

/// `A(θ) = a_R(θ) a_T(θ)^T`, shape `M_R × M_T`.
pub fn steering_matrix(cfg: &ArrayConfig, theta: f64) -> ComplexMatrix {
    rx_steering(cfg, theta) * tx_steering(cfg, theta).transpose()
}
