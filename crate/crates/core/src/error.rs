use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not a projector: {0}")]
    NotProjector(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("state cannot be normalized (norm {norm:.3e})")]
    NotNormalizable { norm: f64 },

    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),

    #[error("invalid expansion: {0}")]
    InvalidExpansion(String),

    #[error("correlator has imaginary residue {0:.3e}")]
    ComplexCorrelator(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
