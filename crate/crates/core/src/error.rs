use thiserror::Error;

/// Errors raised by the spectral and certification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not hyperbolic (trace {trace})")]
    NotHyperbolic { trace: f64 },

    #[error("both candidate eigenvector rows vanish")]
    DegenerateRow,

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("no separating cone: {0}")]
    ConeConstruction(String),

    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
