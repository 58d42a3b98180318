//! Radar-to-base-station interference channels `H_i` (`N_R^BS(i) × M_T`).
//!
//! Entries are i.i.d. circularly-symmetric complex Gaussian with unit
//! variance (Rayleigh fading). Receive antenna counts may differ per BS.

use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, ComplexMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct InterferenceChannel {
    /// One-based base-station id.
    pub bs_id: usize,
    pub matrix: ComplexMatrix,
}

impl InterferenceChannel {
    pub fn new(bs_id: usize, matrix: ComplexMatrix) -> Result<Self> {
        if bs_id == 0 {
            return Err(Error::invalid("bs_id is one-based"));
        }
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::invalid(format!("channel {bs_id} has an empty dimension")));
        }
        if !all_finite(&matrix) {
            return Err(Error::invalid(format!("channel {bs_id} has non-finite entries")));
        }
        Ok(InterferenceChannel { bs_id, matrix })
    }

    pub fn rx_antennas(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_tx(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Ordered channels with ids `1..=N_BS`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    channels: Vec<InterferenceChannel>,
}

impl ChannelSet {
    pub fn new(channels: Vec<InterferenceChannel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::invalid("channel set must contain at least one channel"));
        }
        let num_tx = channels[0].num_tx();
        for (i, ch) in channels.iter().enumerate() {
            if ch.bs_id != i + 1 {
                return Err(Error::invalid(format!(
                    "bs_ids must be 1..=N_BS in order; position {} has id {}",
                    i + 1,
                    ch.bs_id
                )));
            }
            if ch.num_tx() != num_tx {
                return Err(Error::invalid(format!(
                    "channel {} has {} columns, expected {num_tx}",
                    ch.bs_id,
                    ch.num_tx()
                )));
            }
        }
        Ok(ChannelSet { channels })
    }

    pub fn channels(&self) -> &[InterferenceChannel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn num_tx(&self) -> usize {
        self.channels[0].num_tx()
    }

    pub fn get(&self, bs_id: usize) -> Option<&InterferenceChannel> {
        bs_id.checked_sub(1).and_then(|i| self.channels.get(i))
    }

    pub fn to_document(&self) -> ChannelSetDocument {
        ChannelSetDocument {
            num_tx: self.num_tx(),
            channels: self
                .channels
                .iter()
                .map(|ch| {
                    let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
                        ch.matrix
                            .row_iter()
                            .map(|r| r.iter().map(f).collect())
                            .collect()
                    };
                    ChannelEntry {
                        bs_id: ch.bs_id,
                        rx_antennas: ch.rx_antennas(),
                        re: rows(|z| z.re),
                        im: rows(|z| z.im),
                    }
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &ChannelSetDocument) -> Result<Self> {
        let mut channels = Vec::with_capacity(doc.channels.len());
        for entry in &doc.channels {
            let rows = entry.rx_antennas;
            let shape_ok = entry.re.len() == rows
                && entry.im.len() == rows
                && entry
                    .re
                    .iter()
                    .chain(entry.im.iter())
                    .all(|r| r.len() == doc.num_tx);
            if !shape_ok {
                return Err(Error::invalid(format!(
                    "channel {} entries do not form a {rows} x {} matrix",
                    entry.bs_id, doc.num_tx
                )));
            }
            let m = ComplexMatrix::from_fn(rows, doc.num_tx, |r, c| {
                Complex64::new(entry.re[r][c], entry.im[r][c])
            });
            channels.push(InterferenceChannel::new(entry.bs_id, m)?);
        }
        ChannelSet::new(channels)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_document()).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: ChannelSetDocument = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        ChannelSet::from_document(&doc)
    }
}

/// On-disk channel set: real and imaginary parts as row-major nested arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSetDocument {
    pub num_tx: usize,
    pub channels: Vec<ChannelEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    pub bs_id: usize,
    pub rx_antennas: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

fn complex_gaussian(rng: &mut ChaCha8Rng, std: f64) -> Complex64 {
    let s = std * std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Draw one CN(0, 1) matrix per base station.
pub fn sample_channel_set(num_tx: usize, rx_antennas_per_bs: &[usize], seed: u64) -> Result<ChannelSet> {
    if rx_antennas_per_bs.is_empty() {
        return Err(Error::invalid("rx_antennas_per_bs must not be empty"));
    }
    if num_tx == 0 {
        return Err(Error::invalid("num_tx must be >= 1"));
    }
    if let Some(i) = rx_antennas_per_bs.iter().position(|&n| n == 0) {
        return Err(Error::invalid(format!("base station {} has zero receive antennas", i + 1)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channels = rx_antennas_per_bs
        .iter()
        .enumerate()
        .map(|(i, &rows)| {
            let m = ComplexMatrix::from_fn(rows, num_tx, |_, _| complex_gaussian(&mut rng, 1.0));
            InterferenceChannel { bs_id: i + 1, matrix: m }
        })
        .collect();
    ChannelSet::new(channels)
}

/// Add independent CN(0, `error_std²`) noise to every entry, modelling
/// imperfect channel knowledge at the radar.
pub fn perturb_csi(set: &ChannelSet, error_std: f64, seed: u64) -> Result<ChannelSet> {
    if !(error_std >= 0.0 && error_std.is_finite()) {
        return Err(Error::invalid("error_std must be a finite nonnegative number"));
    }
    if error_std == 0.0 {
        return Ok(set.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channels = set
        .channels
        .iter()
        .map(|ch| {
            let noisy = ch.matrix.map(|z| z + complex_gaussian(&mut rng, error_std));
            InterferenceChannel {
                bs_id: ch.bs_id,
                matrix: noisy,
            }
        })
        .collect();
    ChannelSet::new(channels)
}
