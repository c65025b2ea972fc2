use thiserror::Error;

use crate::tensor::Shape;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("empty input")]
    EmptyInput,

    #[error("ordering violation: {0}")]
    Ordering(String),

    #[error("inconsistent data: {0}")]
    Consistency(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("resource exhausted: {0}")]
    Resource(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, actual: Shape) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
