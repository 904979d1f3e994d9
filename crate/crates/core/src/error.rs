use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the fitting, tracing and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("non-numeric value {value:?} at row {row}, column {column:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite value at row {row}, column {column:?}")]
    NonFinite { row: usize, column: String },

    #[error("ragged CSV: row {row} has {found} fields, header has {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("response column {0:?} not found")]
    MissingResponse(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("column {0:?} has zero scale (constant values)")]
    ZeroScale(String),

    #[error("too many predictors: p = {p} exceeds n - 1 = {max}")]
    TooManyPredictors { p: usize, max: usize },

    #[error("X not full column rank (singular value ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },

    #[error("no residual degrees of freedom: n - p - 1 = {0}")]
    NoResidualDf(i64),

    #[error("relative MSE needs p <= n - 4 (p = {p}, n = {n})")]
    RiskUndefined { p: usize, n: usize },

    #[error("no signal (R^2 = 0): the shrinkage terminus is optimal")]
    TerminusOptimal,

    #[error("perfect fit (R^2 = 1): shrinkage likelihood undefined")]
    PerfectFit,

    #[error("undefined: sigma = 0 and gamma = 0")]
    Indeterminate,

    #[error("invalid shrinkage factors: {0}")]
    InvalidDelta(String),

    #[error("m = {m} outside [0, {p}]")]
    ExtentOutOfRange { m: f64, p: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown trace kind {0:?} (expected coef, rmse, spat, exev or infd)")]
    UnknownTrace(String),

    #[error("trace {0} unavailable: {1}")]
    TraceUnavailable(&'static str, String),

    #[error("replicate {index} failed: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
