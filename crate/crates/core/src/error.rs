use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("geometry error on element {element}: {reason}")]
    Geometry { element: usize, reason: String },

    #[error("non-finite data value in {what} at ({x}, {y})")]
    DataEvaluation { what: &'static str, x: f64, y: f64 },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64, best: Vec<f64> },

    #[error("solver breakdown: {0}")]
    Breakdown(String),

    #[error("matrix is not positive definite (pivot {pivot:.3e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("manufactured data check `{check}` failed: residual {residual:.3e} at ({x}, {y}) on side {side}")]
    CheckFailed { check: &'static str, residual: f64, x: f64, y: f64, side: u8 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
