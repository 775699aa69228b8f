use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square and non-empty, got {rows} rows with lengths {cols:?}")]
    NonSquare { rows: usize, cols: Vec<usize> },

    #[error("entry ({row}, {col}) is negative: {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    /// Row indices are 0-based.
    #[error("RowSumViolation: row {row} sums to {sum}, expected 1 within 1e-9")]
    RowSumViolation { row: usize, sum: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("probability vector is invalid: {0}")]
    InvalidDistribution(String),

    #[error("state {state} is outside 1..={d}")]
    StateOutOfRange { state: usize, d: usize },

    #[error("sequence has {len} observations, at least {min} required")]
    SequenceTooShort { len: usize, min: usize },

    #[error("vector of length {0} is not a perfect square")]
    LengthNotSquare(usize),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("matrix powers did not converge to identical rows (effective exponent {exponent}, divergence {divergence:e})")]
    NoLimit { exponent: u64, divergence: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("alpha must lie in (0, 0.5), got {0}")]
    AlphaOutOfRange(f64),

    #[error("at least 2 bootstrap resamples are required, got {0}")]
    TooFewResamples(usize),

    #[error("no intervals supplied")]
    EmptyList,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
