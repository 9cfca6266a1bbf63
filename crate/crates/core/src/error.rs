use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distance {0} m is below the 1 m pathloss reference")]
    DistanceBelowReference(f64),

    #[error("channel realization contains no propagation paths")]
    EmptyRealization,

    #[error("amplification factors must be finite and non-negative, got {0}")]
    InvalidAmplification(f64),

    #[error("amplification vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("tap count T = {taps} must be smaller than S = {subcarriers} subcarriers")]
    CyclicPrefixTooLong { taps: usize, subcarriers: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("strategy needs {needed} repeaters but the scenario has {available}")]
    NotEnoughRepeaters { needed: usize, available: usize },

    #[error("bandwidth {bandwidth} Hz is not an integer multiple of the {spacing} Hz subcarrier spacing")]
    BandwidthSpacingMismatch { bandwidth: f64, spacing: f64 },

    #[error("grid search supports at most 4 subcarriers, got {0}")]
    GridSearchTooLarge(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
