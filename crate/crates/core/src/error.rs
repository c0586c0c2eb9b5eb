use thiserror::Error;

/// Errors produced by the numerical layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires zero curvature (ell = 0), got ell = {0}")]
    CurvatureNotZero(f64),

    #[error("linear-algebra backend failure: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),

    #[error("system is singular or nearly singular at lambda = {lambda}")]
    NearSingular { lambda: f64 },

    #[error("{context}: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge {
        context: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("stiffness matrix lost positive definiteness (coercivity failure)")]
    CoercivityLost,

    #[error("decay fit window [{start}, {end}] is invalid: {reason}")]
    BadFitWindow {
        start: f64,
        end: f64,
        reason: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
