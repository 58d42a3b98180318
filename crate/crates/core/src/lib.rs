//! MIMO radar / cellular spectrum-sharing simulator.
//!
//! A colocated MIMO radar projects its orthogonal waveforms onto the null
//! space of one radar-to-base-station interference channel, chosen so the
//! projection removes as little waveform energy as possible, and the effect
//! on maximum-likelihood estimates of target angle, delay and Doppler is
//! measured.
//!
//! Pipeline: [`waveform`] → [`channel`] → [`selection`] (scoring each
//! [`projection`]) → [`echo`] → [`estimator`], driven end to end by
//! [`harness`].

pub mod array;
pub mod channel;
pub mod echo;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod projection;
pub mod selection;
pub mod waveform;

pub use error::{Error, Result};
