use thiserror::Error;

/// Errors raised by the construction, evolution, potential and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpcError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric: first violation at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("d = gamma * n = {gamma} * {n} is not an integer; nearest admissible n: {below} or {above}")]
    NonIntegralBlockSize {
        gamma: String,
        n: usize,
        below: usize,
        above: usize,
    },

    #[error("deterministic capability split needs tau_t * d integral; tau_{t} * {d} = {product}")]
    NonIntegralSplit { t: u32, d: usize, product: f64 },

    #[error("spec of family `{0}` lacks the interleaved symmetry required for reduction")]
    NotReducible(String),

    #[error("threshold bracket could not be established: {0}")]
    NoBracket(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T, E = GpcError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> GpcError {
    GpcError::InvalidParameter(msg.into())
}
