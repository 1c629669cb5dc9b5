use thiserror::Error;

/// Failure modes shared by every engine in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("invalid Fock cutoff {cutoff}: at least {min} levels are required")]
    InvalidCutoff { cutoff: usize, min: usize },

    #[error("shape mismatch: expected dimension {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error(
        "Fock cutoff {cutoff} is too small: weight {edge_weight:.3e} on the top levels exceeds {tolerance:.1e}; increase the cutoff"
    )]
    TruncationInadequate {
        cutoff: usize,
        edge_weight: f64,
        tolerance: f64,
    },

    #[error("not converged by t = {t}: last residual {residual:.3e}")]
    NotConverged { t: f64, residual: f64 },

    #[error(
        "linear solve failed ({reason}); pivot ratio condition estimate {condition_estimate:.3e}"
    )]
    Solver {
        reason: String,
        condition_estimate: f64,
    },

    #[error("every point of the sweep failed")]
    SweepFailed,

    #[error("susceptibility ridge never leaves delta = 0 for g in [{g_min}, {g_max}]; extend the pump range")]
    NoThreshold { g_min: f64, g_max: f64 },

    #[error("fit refused: {0}")]
    FitRefused(String),

    #[error("stationary phase is undefined at g = 0")]
    PhaseUndefined,
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidInput,
    Convergence,
    Truncation,
    Internal,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_)
            | Error::DegenerateModel(_)
            | Error::InvalidCutoff { .. }
            | Error::ShapeMismatch { .. }
            | Error::FitRefused(_)
            | Error::PhaseUndefined => ErrorKind::InvalidInput,
            Error::IntegrationFailure { .. }
            | Error::NotConverged { .. }
            | Error::Solver { .. }
            | Error::SweepFailed
            | Error::NoThreshold { .. } => ErrorKind::Convergence,
            Error::TruncationInadequate { .. } => ErrorKind::Truncation,
            Error::Consistency(_) => ErrorKind::Internal,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
