//! Null-space projection of radar waveforms.
//!
//! For a channel `H = U Σ V^H` with numerical rank `k`, the projector onto
//! its null space is `P = V Σ' V^H` with `Σ' = diag(0, …, 0, 1, …, 1)`
//! (`k` zeros). It satisfies `H P = 0` and `P² = P`, so `P X` is invisible
//! to the base station behind `H`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::channel::InterferenceChannel;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_part, jacobi_svd, ComplexMatrix, Svd};
use crate::waveform::WaveformMatrix;

/// Default relative rank cutoff for singular values.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    channel_rank: usize,
    rank_tolerance: f64,
}

impl Projector {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn num_tx(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn channel_rank(&self) -> usize {
        self.channel_rank
    }

    pub fn null_dim(&self) -> usize {
        self.num_tx() - self.channel_rank
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    /// The channel has full column rank: the null space is `{0}` and the
    /// projected waveform is identically zero.
    pub fn is_degenerate(&self) -> bool {
        self.null_dim() == 0
    }

    pub fn identity(num_tx: usize) -> Self {
        Projector {
            matrix: ComplexMatrix::identity(num_tx, num_tx),
            channel_rank: 0,
            rank_tolerance: 0.0,
        }
    }

    pub fn diagnostics(&self, h: &InterferenceChannel) -> ProjectorDiagnostics {
        let p = &self.matrix;
        ProjectorDiagnostics {
            channel_rank: self.channel_rank,
            null_dim: self.null_dim(),
            degenerate: self.is_degenerate(),
            trace: p.trace().re,
            channel_residual: frobenius(&(&h.matrix * p)),
            idempotence_residual: frobenius(&(p * p - p)),
            hermitian_residual: frobenius(&(p - p.adjoint())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ProjectorDiagnostics {
    pub channel_rank: usize,
    pub null_dim: usize,
    pub degenerate: bool,
    pub trace: f64,
    /// `‖H P‖_F`
    pub channel_residual: f64,
    /// `‖P² − P‖_F`
    pub idempotence_residual: f64,
    pub hermitian_residual: f64,
}

pub fn channel_svd(h: &InterferenceChannel) -> Result<Svd> {
    if !crate::linalg::all_finite(&h.matrix) {
        return Err(Error::invalid(format!("channel {} has non-finite entries", h.bs_id)));
    }
    Ok(jacobi_svd(&h.matrix))
}

/// Number of singular values above `tol · max(σ_1, 1)`.
pub fn numerical_rank(singular_values: &[f64], tol: f64) -> usize {
    let largest = singular_values.first().copied().unwrap_or(0.0);
    let cutoff = tol * largest.max(1.0);
    singular_values.iter().take_while(|&&s| s > cutoff).count()
}

/// `Σ'`: `k` leading zeros then ones, `M_T × M_T`.
pub fn sigma_prime(singular_values: &[f64], num_tx: usize, tol: f64) -> DMatrix<f64> {
    let k = numerical_rank(singular_values, tol).min(num_tx);
    DMatrix::from_fn(num_tx, num_tx, |i, j| if i == j && i >= k { 1.0 } else { 0.0 })
}

/// `P = V Σ' V^H` for the channel's null space.
///
/// Full-column-rank channels yield the zero projector, flagged through
/// [`Projector::is_degenerate`].
pub fn projection_matrix(h: &InterferenceChannel, tol: f64) -> Result<Projector> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::invalid("rank tolerance must be finite and nonnegative"));
    }
    let svd = channel_svd(h)?;
    let num_tx = h.num_tx();
    let sp = sigma_prime(&svd.singular_values, num_tx, tol);
    let channel_rank = numerical_rank(&svd.singular_values, tol);

    let sp_c: ComplexMatrix = sp.map(|x| Complex64::new(x, 0.0));
    let p = &svd.v * sp_c * svd.v.adjoint();
    Ok(Projector {
        matrix: hermitian_part(&p),
        channel_rank,
        rank_tolerance: tol,
    })
}

/// `P X`, snapshot by snapshot.
pub fn project_waveform(p: &Projector, x: &WaveformMatrix) -> Result<WaveformMatrix> {
    if p.num_tx() != x.num_tx() {
        return Err(Error::invalid(format!(
            "projector is {}x{} but waveform has {} rows",
            p.num_tx(),
            p.num_tx(),
            x.num_tx()
        )));
    }
    Ok(x.with_samples(p.matrix() * x.samples()))
}
