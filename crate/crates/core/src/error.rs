use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Every candidate channel has a trivial null space, so no projection can
    /// keep the radar quiet at any base station.
    #[error("no usable null space: all {0} interference channels are full column rank")]
    NoUsableNullSpace(usize),

    /// `a_T^H R^T a_T` vanished, i.e. the reference waveform carries no
    /// energy along the probed transmit steering direction.
    #[error("degenerate ML denominator ({value:.3e} below guard {guard:.3e})")]
    DegenerateDenominator { value: f64, guard: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
