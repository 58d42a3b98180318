//! Grid-search maximum-likelihood estimation of target angle, delay and
//! Doppler.
//!
//! The single-target ML objective is
//!
//! ```text
//!            | a_R^H(θ) E(τ, f) a_T^*(θ) |²
//! J(θ,τ,f) = ------------------------------
//!              M_R · a_T^H(θ) R^T a_T(θ)
//! ```
//!
//! with the cross-ambiguity matrix
//! `E(τ, f) = T_s Σ_n y[n] x_ref[:, n − τ]^H exp(+j 2π f n T_s)` and the
//! reference correlation `R = T_s Σ_n x_ref[n] x_ref[n]^H`. Each estimator
//! sweeps one axis with the other two parameters held at their true values.
//!
//! For null-space-projected transmission the projected waveform `P X` is used
//! both to synthesise the echo and as the reference, so `R` becomes
//! `P R_X P^H` and the transmit steering vector is effectively `P^H a_T`.
//!
//! Delay and Doppler sweeps do not materialise `E`: with
//! `r[n] = a_R^H y[n]` and `s[n] = a_T^T x_ref[:, n]` the numerator is
//! `|T_s Σ_n r[n] conj(s[n − τ]) exp(j 2π f n T_s)|²`, an `O(N)` sum per grid
//! point.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{rx_steering, tx_steering, ArrayConfig};
use crate::echo::ReceivedEcho;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::waveform::{correlation_matrix, WaveformMatrix};

/// Grid points whose denominator falls below this fraction of `trace(R)`
/// are excluded from the search.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Angle,
    Delay,
    Doppler,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationGrid {
    pub angles_rad: Vec<f64>,
    pub delays: Vec<usize>,
    pub dopplers_hz: Vec<f64>,
}

impl EstimationGrid {
    pub fn validate(&self) -> Result<()> {
        check_increasing("angle", &self.angles_rad)?;
        let delays: Vec<f64> = self.delays.iter().map(|&d| d as f64).collect();
        check_increasing("delay", &delays)?;
        check_increasing("doppler", &self.dopplers_hz)
    }
}

fn check_increasing(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{name} grid has non-finite points")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("{name} grid is not strictly increasing")));
    }
    Ok(())
}

/// Outcome of a one-axis sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationResult {
    pub axis: Axis,
    /// Grid in the axis' native unit: radians, samples or Hz.
    pub grid: Vec<f64>,
    /// Objective per grid point; `None` where the denominator guard tripped.
    pub objective: Vec<Option<f64>>,
    pub best_index: usize,
    pub estimate: f64,
    pub peak: f64,
}

impl EstimationResult {
    fn from_surface(axis: Axis, grid: Vec<f64>, objective: Vec<Option<f64>>) -> Result<Self> {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in objective.iter().enumerate() {
            if let Some(v) = *v {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
        }
        let (best_index, peak) = best.ok_or(Error::DegenerateDenominator {
            value: 0.0,
            guard: DENOMINATOR_GUARD,
        })?;
        Ok(EstimationResult {
            axis,
            estimate: grid[best_index],
            grid,
            objective,
            best_index,
            peak,
        })
    }

    pub fn excluded(&self) -> Vec<usize> {
        self.objective
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.is_none().then_some(i))
            .collect()
    }
}

fn check_pair(y: &ReceivedEcho, xref: &WaveformMatrix) -> Result<()> {
    if y.num_samples() != xref.num_samples() {
        return Err(Error::invalid(format!(
            "echo has {} samples but reference has {}",
            y.num_samples(),
            xref.num_samples()
        )));
    }
    Ok(())
}

fn check_array(cfg: &ArrayConfig, y: &ReceivedEcho, xref: &WaveformMatrix) -> Result<()> {
    if y.num_rx() != cfg.num_rx || xref.num_tx() != cfg.num_tx {
        return Err(Error::invalid(format!(
            "echo/reference are {}x{} but the array is M_R={} M_T={}",
            y.num_rx(),
            xref.num_tx(),
            cfg.num_rx,
            cfg.num_tx
        )));
    }
    Ok(())
}

#[inline]
fn phasor(freq_hz: f64, n: usize, ts: f64) -> Complex64 {
    Complex64::from_polar(1.0, (TAU * freq_hz * ts * n as f64) % TAU)
}

/// `E = T_s Σ_n y[n] x_ref[:, n − delay]^H exp(j 2π f n T_s)`, `M_R × M_T`.
pub fn cross_ambiguity(
    y: &ReceivedEcho,
    xref: &WaveformMatrix,
    delay: usize,
    doppler_hz: f64,
) -> Result<ComplexMatrix> {
    check_pair(y, xref)?;
    let n = y.num_samples();
    if delay >= n {
        return Err(Error::invalid(format!("delay {delay} outside window of {n} samples")));
    }
    let ts = xref.sample_period();
    let ys = y.samples();
    let xs = xref.samples();
    let mut e = ComplexMatrix::zeros(y.num_rx(), xref.num_tx());
    for t in delay..n {
        let yc = ys.column(t) * phasor(doppler_hz, t, ts);
        let xc = xs.column(t - delay);
        for k in 0..xref.num_tx() {
            let xk = xc[k].conj();
            for l in 0..y.num_rx() {
                e[(l, k)] += yc[l] * xk;
            }
        }
    }
    Ok(e.scale(ts))
}

/// `M_R · a_T^H R^T a_T`.
pub fn ml_denominator(r: &ComplexMatrix, cfg: &ArrayConfig, theta: f64) -> f64 {
    let at = tx_steering(cfg, theta);
    let quad = at.adjoint() * r.transpose() * &at;
    cfg.num_rx as f64 * quad[(0, 0)].re
}

/// `|a_R^H E a_T^*|²`.
pub fn ml_numerator(e: &ComplexMatrix, cfg: &ArrayConfig, theta: f64) -> f64 {
    let ar = rx_steering(cfg, theta);
    let at = tx_steering(cfg, theta);
    (ar.adjoint() * e * at.conjugate())[(0, 0)].norm_sqr()
}

fn guard_for(r: &ComplexMatrix) -> f64 {
    DENOMINATOR_GUARD * r.trace().re
}

/// The general single-target objective for correlation `R`.
pub fn ml_objective(e: &ComplexMatrix, r: &ComplexMatrix, cfg: &ArrayConfig, theta: f64) -> Result<f64> {
    let den = ml_denominator(r, cfg, theta);
    let guard = guard_for(r) * cfg.num_rx as f64;
    if den <= guard {
        return Err(Error::DegenerateDenominator { value: den, guard });
    }
    Ok(ml_numerator(e, cfg, theta) / den)
}

/// The orthogonal-transmission form `|a_R^H E a_T^*|² / (M_R M_T)`; equals
/// `T_0 ·` [`ml_objective`] when `R = T_0 I`.
pub fn ml_objective_orthogonal(e: &ComplexMatrix, cfg: &ArrayConfig, theta: f64) -> f64 {
    ml_numerator(e, cfg, theta) / (cfg.num_rx * cfg.num_tx) as f64
}

/// Sweep the angle grid with delay and Doppler known.
pub fn estimate_angle(
    y: &ReceivedEcho,
    xref: &WaveformMatrix,
    true_delay: usize,
    true_doppler_hz: f64,
    angles_rad: &[f64],
    cfg: &ArrayConfig,
) -> Result<EstimationResult> {
    check_increasing("angle", angles_rad)?;
    check_array(cfg, y, xref)?;
    let e = cross_ambiguity(y, xref, true_delay, true_doppler_hz)?;
    let r = correlation_matrix(xref);
    let objective = angles_rad
        .par_iter()
        .map(|&theta| ml_objective(&e, &r, cfg, theta).ok())
        .collect();
    EstimationResult::from_surface(Axis::Angle, angles_rad.to_vec(), objective)
}

/// Receive and transmit beamformed sequences `r[n] = a_R^H y[n]`,
/// `s[n] = a_T^T x_ref[:, n]`.
fn beamformed(y: &ReceivedEcho, xref: &WaveformMatrix, cfg: &ArrayConfig, theta: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let ar = rx_steering(cfg, theta);
    let at = tx_steering(cfg, theta);
    let r = (ar.adjoint() * y.samples()).iter().copied().collect();
    let s = (at.transpose() * xref.samples()).iter().copied().collect();
    (r, s)
}

/// Denominator at `theta`, or the degenerate-denominator error.
fn fixed_denominator(xref: &WaveformMatrix, cfg: &ArrayConfig, theta: f64) -> Result<f64> {
    let r = correlation_matrix(xref);
    let den = ml_denominator(&r, cfg, theta);
    let guard = guard_for(&r) * cfg.num_rx as f64;
    if den <= guard {
        return Err(Error::DegenerateDenominator { value: den, guard });
    }
    Ok(den)
}

/// Sweep the delay grid (sample indices) with angle and Doppler known.
pub fn estimate_delay(
    y: &ReceivedEcho,
    xref: &WaveformMatrix,
    true_theta: f64,
    true_doppler_hz: f64,
    delays: &[usize],
    cfg: &ArrayConfig,
) -> Result<EstimationResult> {
    let grid: Vec<f64> = delays.iter().map(|&d| d as f64).collect();
    check_increasing("delay", &grid)?;
    check_pair(y, xref)?;
    check_array(cfg, y, xref)?;
    let n = y.num_samples();
    if let Some(&d) = delays.iter().find(|&&d| d >= n) {
        return Err(Error::invalid(format!("delay grid point {d} outside window of {n}")));
    }
    let den = fixed_denominator(xref, cfg, true_theta)?;
    let ts = xref.sample_period();
    let (r, s) = beamformed(y, xref, cfg, true_theta);
    let demod: Vec<Complex64> = r
        .iter()
        .enumerate()
        .map(|(t, v)| v * phasor(true_doppler_hz, t, ts))
        .collect();

    let objective = delays
        .par_iter()
        .map(|&d| {
            let acc: Complex64 = demod[d..]
                .iter()
                .zip(&s[..n - d])
                .map(|(a, b)| a * b.conj())
                .sum();
            Some((acc * ts).norm_sqr() / den)
        })
        .collect();
    EstimationResult::from_surface(Axis::Delay, grid, objective)
}

/// Sweep the Doppler grid (Hz) with angle and delay known.
pub fn estimate_doppler(
    y: &ReceivedEcho,
    xref: &WaveformMatrix,
    true_theta: f64,
    true_delay: usize,
    dopplers_hz: &[f64],
    cfg: &ArrayConfig,
) -> Result<EstimationResult> {
    check_increasing("doppler", dopplers_hz)?;
    check_pair(y, xref)?;
    check_array(cfg, y, xref)?;
    let n = y.num_samples();
    if true_delay >= n {
        return Err(Error::invalid(format!("delay {true_delay} outside window of {n}")));
    }
    let den = fixed_denominator(xref, cfg, true_theta)?;
    let ts = xref.sample_period();
    let (r, s) = beamformed(y, xref, cfg, true_theta);
    let lagged: Vec<Complex64> = (true_delay..n)
        .map(|t| r[t] * s[t - true_delay].conj())
        .collect();

    let objective = dopplers_hz
        .par_iter()
        .map(|&f| {
            // exp(j 2π f t T_s) by recurrence, re-anchored every block so the
            // accumulated rounding stays at the 1e-13 level.
            let mut acc = Complex64::new(0.0, 0.0);
            let step = phasor(f, 1, ts);
            let mut rot = Complex64::new(0.0, 0.0);
            for (i, v) in lagged.iter().enumerate() {
                let t = true_delay + i;
                rot = if i % 256 == 0 { phasor(f, t, ts) } else { rot * step };
                acc += v * rot;
            }
            Some((acc * ts).norm_sqr() / den)
        })
        .collect();
    EstimationResult::from_surface(Axis::Doppler, dopplers_hz.to_vec(), objective)
}

/// `a_R^H E a_T^*` through the beamformed shortcut; used to cross-check the
/// matrix path.
pub fn beamformed_statistic(
    y: &ReceivedEcho,
    xref: &WaveformMatrix,
    theta: f64,
    delay: usize,
    doppler_hz: f64,
    cfg: &ArrayConfig,
) -> Complex64 {
    let ts = xref.sample_period();
    let (r, s) = beamformed(y, xref, cfg, theta);
    let n = r.len();
    (delay..n)
        .map(|t| r[t] * phasor(doppler_hz, t, ts) * s[t - delay].conj())
        .sum::<Complex64>()
        * ts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::steering_matrix;
    use crate::channel::sample_channel_set;
    use crate::echo::{add_noise, synthesize_echo, TargetScene};
    use crate::linalg::frobenius;
    use crate::projection::{project_waveform, projection_matrix, DEFAULT_RANK_TOLERANCE};
    use crate::waveform::{generate, generate_orthogonal, WaveformFamily};
    use proptest::prelude::*;

    const B: f64 = 1e7;

    fn scene(angle_deg: f64, range_m: f64, v: f64) -> TargetScene {
        TargetScene {
            angle_deg,
            range_m,
            radial_velocity_mps: v,
            reflection_magnitude: 1.0,
        }
    }

    fn deg_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).to_radians())
            .collect()
    }

    /// Brute-force triple loop, independent of the implementation's loop order.
    fn ambiguity_oracle(y: &ReceivedEcho, x: &WaveformMatrix, delay: usize, f: f64) -> ComplexMatrix {
        let ts = 1.0 / x.sample_rate();
        let (mr, mt, n) = (y.num_rx(), x.num_tx(), x.num_samples());
        ComplexMatrix::from_fn(mr, mt, |l, k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in delay..n {
                let ph = Complex64::new(0.0, TAU * f * t as f64 * ts).exp();
                acc += y.samples()[(l, t)] * x.samples()[(k, t - delay)].conj() * ph;
            }
            acc * ts
        })
    }

    #[test]
    fn matched_ambiguity_is_t0_times_steering_matrix() {
        let cfg = ArrayConfig::table1();
        let x = generate_orthogonal(10, 1000, B, 1).unwrap();
        // Tiny range: zero-sample delay, alpha ≈ 1.
        let sc = scene(0.0, 1e-9, 0.0);
        let y = synthesize_echo(&sc, &cfg, &x).unwrap();
        let e = cross_ambiguity(&y, &x, 0, 0.0).unwrap();
        let alpha = crate::echo::path_loss_alpha(&sc, &cfg);
        let t0 = x.duration();
        let expected = steering_matrix(&cfg, 0.0).map(|z| z * alpha * t0);
        assert!(frobenius(&(&e - expected)) < 1e-12 * t0);
        assert!((e[(0, 0)].norm() - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn ambiguity_matches_brute_force() {
        let cfg = ArrayConfig::table1();
        let x = generate(WaveformFamily::PseudoRandom, 10, 700, B, 3).unwrap();
        let y = synthesize_echo(&scene(12.0, 3000.0, 500.0), &cfg, &x).unwrap();
        for (d, f) in [(200usize, 6_666.0), (0, 0.0), (199, -100.0)] {
            let e = cross_ambiguity(&y, &x, d, f).unwrap();
            let oracle = ambiguity_oracle(&y, &x, d, f);
            assert!(frobenius(&(&e - &oracle)) < 1e-12 * frobenius(&oracle).max(1e-30));
        }
    }

    #[test]
    fn zero_echo_gives_zero_ambiguity() {
        let x = generate_orthogonal(10, 100, B, 1).unwrap();
        let y = ReceivedEcho::new(ComplexMatrix::zeros(7, 100), B).unwrap();
        let e = cross_ambiguity(&y, &x, 5, 10.0).unwrap();
        assert_eq!(frobenius(&e), 0.0);
        let r = correlation_matrix(&x);
        assert_eq!(ml_objective(&e, &r, &ArrayConfig::table1(), 0.3).unwrap(), 0.0);
        assert!(cross_ambiguity(&y, &x, 100, 0.0).is_err());
    }

    #[test]
    fn mismatched_delay_is_suppressed() {
        let cfg = ArrayConfig::table1();
        let x = generate_orthogonal(10, 2000, B, 8).unwrap();
        let y = synthesize_echo(&scene(0.0, 1e-9, 0.0), &cfg, &x).unwrap();
        let t0 = x.duration();
        // Shift by a full code block of M_T samples.
        let e = cross_ambiguity(&y, &x, 10, 0.0).unwrap();
        let worst = e.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(worst < 0.1 * t0, "sidelobe {worst} vs {t0}");
    }

    #[test]
    fn general_objective_reduces_to_orthogonal_form() {
        let cfg = ArrayConfig::table1();
        let x = generate_orthogonal(10, 10_000, B, 2).unwrap();
        let y = synthesize_echo(&scene(0.0, 5000.0, 2000.0), &cfg, &x).unwrap();
        let sc = TargetScene::table1();
        let e = cross_ambiguity(&y, &x, 333, sc.doppler_hz(&cfg)).unwrap();
        let r = correlation_matrix(&x);
        let t0 = x.duration();
        for theta in [-1.2, -0.3, 0.0, 0.4, 1.5] {
            let den = ml_denominator(&r, &cfg, theta);
            assert!((den / (7.0 * 10.0 * t0) - 1.0).abs() < 1e-9);
            let general = ml_objective(&e, &r, &cfg, theta).unwrap();
            let orth = ml_objective_orthogonal(&e, &cfg, theta);
            assert!((general * t0 / orth - 1.0).abs() < 1e-9, "θ={theta}");
        }
    }

    #[test]
    fn objective_is_quadratic_in_e() {
        let cfg = ArrayConfig::table1();
        let x = generate_orthogonal(10, 500, B, 2).unwrap();
        let y = synthesize_echo(&scene(5.0, 1000.0, 0.0), &cfg, &x).unwrap();
        let e = cross_ambiguity(&y, &x, 33, 0.0).unwrap();
        let r = correlation_matrix(&x);
        let base = ml_objective(&e, &r, &cfg, 0.1).unwrap();
        let scaled = ml_objective(&e.scale(3.0), &r, &cfg, 0.1).unwrap();
        assert!((scaled / base - 9.0).abs() < 1e-12);
    }

    #[test]
    fn zero_reference_is_degenerate() {
        let cfg = ArrayConfig::table1();
        let x = WaveformMatrix::new(ComplexMatrix::zeros(10, 100), B).unwrap();
        let r = correlation_matrix(&x);
        let e = ComplexMatrix::zeros(7, 10);
        assert!(matches!(
            ml_objective(&e, &r, &cfg, 0.0),
            Err(Error::DegenerateDenominator { .. })
        ));
        let y = ReceivedEcho::new(ComplexMatrix::zeros(7, 100), B).unwrap();
        assert!(estimate_angle(&y, &x, 0, 0.0, &[0.0, 0.1], &cfg).is_err());
        assert!(estimate_delay(&y, &x, 0.0, 0.0, &[0, 1], &cfg).is_err());
    }

    #[test]
    fn default_scene_noiseless_estimates() {
        let cfg = ArrayConfig::table1();
        let sc = TargetScene::table1();
        let x = generate_orthogonal(10, 10_000, B, 4).unwrap();
        let y = synthesize_echo(&sc, &cfg, &x).unwrap();
        let fd = sc.doppler_hz(&cfg);

        let angles = deg_grid(-90.0, 90.0, 1801);
        let a = estimate_angle(&y, &x, 333, fd, &angles, &cfg).unwrap();
        assert_eq!(a.estimate, 0.0);
        assert_eq!(a.best_index, 900);

        let delays: Vec<usize> = (283..=383).collect();
        let d = estimate_delay(&y, &x, 0.0, fd, &delays, &cfg).unwrap();
        assert_eq!(d.estimate, 333.0);

        let dopplers: Vec<f64> = (0..=1000).map(|i| i as f64 * 100.0).collect();
        let f = estimate_doppler(&y, &x, 0.0, 333, &dopplers, &cfg).unwrap();
        assert_eq!(f.estimate, 47_100.0);
    }

    #[test]
    fn alternate_angle_and_zero_motion() {
        let cfg = ArrayConfig::table1();
        let x = generate_orthogonal(10, 4000, B, 6).unwrap();
        let sc = scene(20.0, 1e-9, 0.0);
        let y = synthesize_echo(&sc, &cfg, &x).unwrap();
        let angles = deg_grid(-90.0, 90.0, 181);
        let a = estimate_angle(&y, &x, 0, 0.0, &angles, &cfg).unwrap();
        assert!((a.estimate.to_degrees() - 20.0).abs() < 1e-9);

        let d = estimate_delay(&y, &x, 20f64.to_radians(), 0.0, &(0..40).collect::<Vec<_>>(), &cfg).unwrap();
        assert_eq!(d.estimate, 0.0);
        let dopplers: Vec<f64> = (0..=100).map(|i| i as f64 * 100.0).collect();
        let f = estimate_doppler(&y, &x, 20f64.to_radians(), 0, &dopplers, &cfg).unwrap();
        assert_eq!(f.estimate, 0.0);
    }

    #[test]
    fn projected_waveform_keeps_delay_and_doppler() {
        let cfg = ArrayConfig::table1();
        let sc = TargetScene::table1();
        let fd = sc.doppler_hz(&cfg);
        let x = generate_orthogonal(10, 10_000, B, 9).unwrap();
        let set = sample_channel_set(10, &[2, 8], 3).unwrap();
        let delays: Vec<usize> = (283..=383).collect();
        let dopplers: Vec<f64> = (300..=700).map(|i| i as f64 * 100.0).collect();
        let angles = deg_grid(-10.0, 10.0, 201);
        for h in set.channels() {
            let p = projection_matrix(h, DEFAULT_RANK_TOLERANCE).unwrap();
            let px = project_waveform(&p, &x).unwrap();
            let y = synthesize_echo(&sc, &cfg, &px).unwrap();
            let d = estimate_delay(&y, &px, 0.0, fd, &delays, &cfg).unwrap();
            let f = estimate_doppler(&y, &px, 0.0, 333, &dopplers, &cfg).unwrap();
            let a = estimate_angle(&y, &px, 333, fd, &angles, &cfg).unwrap();
            assert_eq!(d.estimate, 333.0);
            assert_eq!(f.estimate, 47_100.0);
            assert_eq!(a.estimate, 0.0);
        }
    }

    #[test]
    fn beamformed_shortcut_matches_matrix_path() {
        let cfg = ArrayConfig::table1();
        let x = generate(WaveformFamily::PseudoRandom, 10, 900, B, 10).unwrap();
        let y = synthesize_echo(&scene(-17.0, 4000.0, 1500.0), &cfg, &x).unwrap();
        for (theta, d, f) in [(0.2, 266usize, 35_000.0), (-0.3, 10, -2000.0)] {
            let e = cross_ambiguity(&y, &x, d, f).unwrap();
            let ar = rx_steering(&cfg, theta);
            let at = tx_steering(&cfg, theta);
            let via_e = (ar.adjoint() * e * at.conjugate())[(0, 0)];
            let via_bf = beamformed_statistic(&y, &x, theta, d, f, &cfg);
            assert!((via_e - via_bf).norm() < 1e-12 * via_e.norm().max(1e-20));
        }
    }

    #[test]
    fn delay_surface_matches_matrix_objective() {
        let cfg = ArrayConfig::table1();
        let x = generate_orthogonal(10, 1200, B, 1).unwrap();
        let sc = scene(3.0, 1500.0, 800.0);
        let y = synthesize_echo(&sc, &cfg, &x).unwrap();
        let fd = sc.doppler_hz(&cfg);
        let theta = sc.angle_rad();
        let delays: Vec<usize> = (90..110).collect();
        let res = estimate_delay(&y, &x, theta, fd, &delays, &cfg).unwrap();
        let r = correlation_matrix(&x);
        for (i, &d) in delays.iter().enumerate() {
            let e = cross_ambiguity(&y, &x, d, fd).unwrap();
            let direct = ml_objective(&e, &r, &cfg, theta).unwrap();
            let got = res.objective[i].unwrap();
            assert!((got - direct).abs() <= 1e-9 * direct.max(res.peak * 1e-6));
        }
        let dop: Vec<f64> = (0..50).map(|i| i as f64 * 1000.0).collect();
        let res = estimate_doppler(&y, &x, theta, 100, &dop, &cfg).unwrap();
        for (i, &f) in dop.iter().enumerate() {
            let e = cross_ambiguity(&y, &x, 100, f).unwrap();
            let direct = ml_objective(&e, &r, &cfg, theta).unwrap();
            let got = res.objective[i].unwrap();
            assert!((got - direct).abs() <= 1e-9 * res.peak);
        }
    }

    #[test]
    fn peak_dominates_beyond_mainlobe() {
        let cfg = ArrayConfig::table1();
        let sc = TargetScene::table1();
        let fd = sc.doppler_hz(&cfg);
        let x = generate_orthogonal(10, 10_000, B, 12).unwrap();
        let y = synthesize_echo(&sc, &cfg, &x).unwrap();
        let delays: Vec<usize> = (0..10_000).step_by(9).collect();
        let res = estimate_delay(&y, &x, 0.0, fd, &delays, &cfg).unwrap();
        let truth = res.objective[delays.iter().position(|&d| d == 333).unwrap()].unwrap();
        for (i, &d) in delays.iter().enumerate() {
            if d.abs_diff(333) > 1 {
                assert!(res.objective[i].unwrap() < truth);
            }
        }
        // Doppler mainlobe half-width is 1/T_0 = 1 kHz.
        let dopplers: Vec<f64> = (0..=200).map(|i| i as f64 * 500.0).collect();
        let f = estimate_doppler(&y, &x, 0.0, 333, &dopplers, &cfg).unwrap();
        let at_truth = f.objective[94].unwrap(); // 47 kHz
        for (i, v) in dopplers.iter().enumerate() {
            if (v - fd).abs() > 1_100.0 {
                assert!(f.objective[i].unwrap() < at_truth, "{v} Hz");
            }
        }
    }

    #[test]
    fn ties_pick_smallest_index() {
        let res = EstimationResult::from_surface(
            Axis::Angle,
            vec![0.0, 1.0, 2.0, 3.0],
            vec![Some(1.0), None, Some(2.0), Some(2.0)],
        )
        .unwrap();
        assert_eq!(res.best_index, 2);
        assert_eq!(res.excluded(), vec![1]);
        assert!(EstimationResult::from_surface(Axis::Delay, vec![0.0], vec![None]).is_err());
    }

    #[test]
    fn grid_validation() {
        let g = EstimationGrid {
            angles_rad: vec![0.0, 0.1],
            delays: vec![3, 2],
            dopplers_hz: vec![0.0],
        };
        assert!(g.validate().is_err());
        let cfg = ArrayConfig::table1();
        let x = generate_orthogonal(10, 100, B, 1).unwrap();
        let y = synthesize_echo(&scene(0.0, 1e-9, 0.0), &cfg, &x).unwrap();
        assert!(estimate_angle(&y, &x, 0, 0.0, &[], &cfg).is_err());
        assert!(estimate_doppler(&y, &x, 0.0, 0, &[1.0, 1.0], &cfg).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn surfaces_invariant_to_global_phase(phi in 0.0..TAU, seed in any::<u64>()) {
            let cfg = ArrayConfig::table1();
            let x = generate_orthogonal(10, 600, B, seed).unwrap();
            let sc = scene(8.0, 2400.0, 900.0);
            let fd = sc.doppler_hz(&cfg);
            let y = add_noise(&synthesize_echo(&sc, &cfg, &x).unwrap(), 5.0, seed).unwrap();
            let yr = y.scaled(Complex64::from_polar(1.0, phi));
            let angles = deg_grid(-30.0, 30.0, 61);
            let a = estimate_angle(&y, &x, 160, fd, &angles, &cfg).unwrap();
            let b = estimate_angle(&yr, &x, 160, fd, &angles, &cfg).unwrap();
            for (u, v) in a.objective.iter().zip(&b.objective) {
                let (u, v) = (u.unwrap(), v.unwrap());
                prop_assert!((u - v).abs() <= 1e-9 * a.peak);
            }
            let delays: Vec<usize> = (150..170).collect();
            let c = estimate_delay(&y, &x, sc.angle_rad(), fd, &delays, &cfg).unwrap();
            let d = estimate_delay(&yr, &x, sc.angle_rad(), fd, &delays, &cfg).unwrap();
            prop_assert_eq!(c.best_index, d.best_index);
            for (u, v) in c.objective.iter().zip(&d.objective) {
                prop_assert!((u.unwrap() - v.unwrap()).abs() <= 1e-9 * c.peak);
            }
        }
    }
}
