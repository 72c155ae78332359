use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Hurst exponent must lie in the open interval (0, 1), got {0}")]
    InvalidHurst(f64),

    #[error("invalid sampling grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("observation path grid does not match the covariance grid")]
    GridMismatch,

    #[error("covariance matrix is not positive definite: pivot {index} is {pivot:e}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("circulant embedding has a negative eigenvalue {value:e} at frequency {index}")]
    NegativeEigenvalue { index: usize, value: f64 },

    #[error("replication {index} failed: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("not enough samples: need at least {needed}, got {actual}")]
    TooFewSamples { needed: usize, actual: usize },

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("nothing to emit: summary has no records")]
    EmptySummary,
}

pub type Result<T> = std::result::Result<T, Error>;
