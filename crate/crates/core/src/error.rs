use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}; only n = 2 and n = 3 are implemented")]
    UnsupportedDimension(usize),

    #[error("point {point:?} lies on the singular set: {what}")]
    Singular { point: Vec<f64>, what: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite integrand value at z = {re} + {im}i")]
    NonFinite { re: f64, im: f64 },

    #[error("argument tracking failed near z = {re} + {im}i: {reason}")]
    StepRefinement { re: f64, im: f64, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("deformation check failed: spread {spread:e} exceeds tolerance {tol:e}")]
    DeformationFailed { spread: f64, tol: f64 },
}
