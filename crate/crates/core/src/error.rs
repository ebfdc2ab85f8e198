use thiserror::Error;

/// Errors produced by pattern generation, Gram assembly and reconstruction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A truncation constant was requested with `m_i == n_i` (or smaller).
    #[error("division by zero: m must exceed n componentwise (n = {n:?}, m = {m:?})")]
    DivisionByZero { n: (usize, usize), m: (usize, usize) },

    #[error("singular Gram matrix: lambda_min = {lambda_min:e}")]
    SingularGram { lambda_min: f64 },

    /// The C-C operator `V` lost rank after thresholding. Tables render this as NaN.
    #[error("singular operator: effective rank {rank} of {dim}")]
    SingularOperator { rank: usize, dim: usize },

    #[error("numerical failure in {routine}: {detail}")]
    NumericalFailure { routine: &'static str, detail: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FrameError {
    fn from(err: std::io::Error) -> Self {
        FrameError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FrameError>;
