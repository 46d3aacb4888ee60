//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("argument outside (0,1): {0}")]
    OutOfUnitInterval(f64),

    #[error("constant input vector: {0}")]
    ConstantInput(String),

    #[error("degenerate dependence (|tau| = 1) cannot be fit")]
    DegenerateDependence,

    #[error("numeric inversion did not converge after {0} iterations")]
    InversionFailed(usize),

    #[error("invalid vine structure: {0}")]
    InvalidStructure(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("test point outside copula support: all quantile weights are zero")]
    OutOfSupport,

    #[error("csv error at row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv { row: 0, message: e.to_string() }
    }
}
