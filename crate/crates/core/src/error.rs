use thiserror::Error;

/// Malformed or inconsistent input: bad indices, dimensions, files.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("invalid rational literal `{0}`")]
    BadRational(String),
    #[error("index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter must be finite, got {0}")]
    NonFinite(f64),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("{0}")]
    Invalid(String),
}
