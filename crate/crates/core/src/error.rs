use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitianInput { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("negative eigenvalue {0:.3e} in PSD input")]
    NegativeEigenvalue(f64),

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("not a valid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("unknown ensemble name `{0}`")]
    UnknownName(String),

    #[error("bad parameter: {0}")]
    BadParam(String),

    #[error("argument outside domain: {0}")]
    DomainError(String),

    #[error("state is not pure (purity {purity:.12})")]
    NotPure { purity: f64 },

    #[error("ensemble contains mixed states; a pure-state ensemble is required")]
    NotPureEnsemble,

    #[error("problem size exceeds supported envelope: {0}")]
    EnvelopeExceeded(String),

    #[error("word length {got} does not match blocklength {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("bad register partition: {0}")]
    BadPartition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("line {} column {}: {}", e.line(), e.column(), e))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
