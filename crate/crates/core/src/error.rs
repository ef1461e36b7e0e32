//! Crate-wide error type.

use thiserror::Error;

use crate::math::QuadratureError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure in {context}: {source}")]
    Quadrature {
        context: String,
        #[source]
        source: QuadratureError,
    },

    #[error("density evaluation failed at observation {row}: {reason}")]
    DensityFailure { row: usize, reason: String },

    #[error("sampler aborted at sweep {sweep} while updating {parameter}: {reason}")]
    SamplerAbort {
        sweep: usize,
        parameter: String,
        reason: String,
    },

    #[error("malformed data at row {row}: {reason}")]
    MalformedData { row: usize, reason: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
