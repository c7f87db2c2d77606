//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the toolkit.
#[derive(Error, Debug)]
pub enum Error {
    #[error("empty series")]
    EmptySeries,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("insufficient data: need at least {required} points, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("zero variance in {what}")]
    ZeroVariance { what: String },

    #[error("horizon {horizon} out of range 1..={max}")]
    HorizonOutOfRange { horizon: usize, max: usize },

    #[error("invalid parameter '{name}': {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("timestamp {found} at line {line} is not {expected} (rows must be hourly-consecutive)")]
    BrokenCadence {
        line: usize,
        found: String,
        expected: String,
    },

    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("missing feature '{0}'")]
    MissingFeature(String),

    #[error("series mismatch in frame: {0}")]
    InvalidFrame(String),

    #[error("split '{0}' is empty")]
    EmptySplit(String),

    #[error("warping window admits no boundary-to-boundary path ({n}x{m}, {window})")]
    WindowTooNarrow { n: usize, m: usize, window: String },

    #[error("no usable segments (all {skipped} segments shorter than {min_len})")]
    NoUsableSegments { skipped: usize, min_len: usize },

    #[error("autocorrelation sequence is not positive definite at lag {lag}")]
    NotPositiveDefinite { lag: usize },

    #[error("model is not fitted")]
    NotFitted,

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit class used by the CLI: 2 for data/input problems,
    /// 3 for numeric/algorithmic failures.
    pub fn exit_class(&self) -> u8 {
        match self {
            Error::BrokenCadence { .. }
            | Error::MalformedRow { .. }
            | Error::MissingFeature(_)
            | Error::InvalidFrame(_)
            | Error::EmptySplit(_)
            | Error::Io { .. }
            | Error::Csv { .. }
            | Error::Json(_)
            | Error::EmptySeries
            | Error::InvalidParameter { .. } => 2,
            _ => 3,
        }
    }
}
