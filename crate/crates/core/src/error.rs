use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed text or JSON input.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown vertex label {0:?}")]
    UnknownVertex(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("signaling behavior: {0}")]
    Signaling(String),

    #[error("unsupported structure: {0}")]
    Unsupported(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid realization: {0}")]
    InvalidRealization(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
