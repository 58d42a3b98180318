//! Best/worst interference-channel selection.
//!
//! Every channel's null-space projector is scored by the waveform energy it
//! removes, `‖X − P_i X‖_F`; the best channel minimises that loss and the
//! worst maximises it. Losses within a relative [`LOSS_TIE_TOLERANCE`] of
//! each other count as tied, and ties go to the lowest `bs_id`; without the
//! tolerance, exactly tied losses would be ordered by rounding noise.
//!
//! With exactly orthogonal, equal-power rows (`X X^H = N·I`) the loss
//! collapses to `loss² = trace((I − P) X X^H) = N·rank(H_i)`. Generic
//! channels with equal antenna counts then score identically and the
//! selection is vacuous; it only discriminates between channels of
//! different rank, or for waveforms that are not exactly orthogonal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::frobenius;
use crate::projection::{projection_matrix, Projector};
use crate::waveform::WaveformMatrix;

/// Relative loss difference below which two channels are considered tied.
pub const LOSS_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SelectionResult {
    /// Zero-based position of `H_best` in the channel set (`bs_id - 1`).
    pub best_index: usize,
    pub worst_index: usize,
    pub losses: Vec<f64>,
    pub best_projector: Projector,
    pub worst_projector: Projector,
    pub projectors: Vec<Projector>,
}

impl SelectionResult {
    pub fn summary(&self) -> SelectionSummary {
        SelectionSummary {
            best_bs_id: self.best_index + 1,
            worst_bs_id: self.worst_index + 1,
            losses: self.losses.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub best_bs_id: usize,
    pub worst_bs_id: usize,
    pub losses: Vec<f64>,
}

/// `‖X − P X‖_F`.
pub fn projection_loss(x: &WaveformMatrix, p: &Projector) -> Result<f64> {
    if p.num_tx() != x.num_tx() {
        return Err(Error::invalid(format!(
            "projector dimension {} does not match waveform rows {}",
            p.num_tx(),
            x.num_tx()
        )));
    }
    let residual = x.samples() - p.matrix() * x.samples();
    Ok(frobenius(&residual))
}

/// `a` beats `b` only by more than the tie tolerance.
fn clearly_less(a: f64, b: f64) -> bool {
    b - a > LOSS_TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Indices of the first minimum and first maximum, scanning in order and
/// replacing the incumbent only on a difference beyond the tie tolerance.
pub fn argmin_argmax(values: &[f64]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if clearly_less(v, values[lo]) {
            lo = i;
        }
        if clearly_less(values[hi], v) {
            hi = i;
        }
    }
    (lo, hi)
}

pub fn select_channels(x: &WaveformMatrix, set: &ChannelSet, tol: f64) -> Result<SelectionResult> {
    if set.num_tx() != x.num_tx() {
        return Err(Error::invalid(format!(
            "channels have {} columns but the waveform has {} rows",
            set.num_tx(),
            x.num_tx()
        )));
    }
    let scored: Vec<(Projector, f64)> = set
        .channels()
        .par_iter()
        .map(|h| {
            let p = projection_matrix(h, tol)?;
            let loss = projection_loss(x, &p)?;
            Ok((p, loss))
        })
        .collect::<Result<_>>()?;

    if scored.iter().all(|(p, _)| p.is_degenerate()) {
        return Err(Error::NoUsableNullSpace(scored.len()));
    }

    let (projectors, losses): (Vec<Projector>, Vec<f64>) = scored.into_iter().unzip();
    let (best_index, worst_index) = argmin_argmax(&losses);
    Ok(SelectionResult {
        best_index,
        worst_index,
        best_projector: projectors[best_index].clone(),
        worst_projector: projectors[worst_index].clone(),
        losses,
        projectors,
    })
}
