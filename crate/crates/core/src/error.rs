use thiserror::Error;

/// Why the monotone (Picard) iteration stopped without converging.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PicardFailure {
    /// An iterate reached the obstacle guard `1 - delta_guard`; evidence that
    /// the parameter lies above the pull-in value.
    GuardTripped,
    /// The iteration budget ran out before the fixed-point tolerance was met.
    Stalled,
}

impl std::fmt::Display for PicardFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PicardFailure::GuardTripped => f.write_str("guard tripped"),
            PicardFailure::Stalled => f.write_str("stalled"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("boundary value mismatch: expected {expected}, found {found}")]
    BoundaryMismatch { expected: f64, found: f64 },

    #[error("zero pivot in banded factorization at row {row}")]
    SingularPivot { row: usize },

    #[error("matrix is not positive definite (failed at row {row})")]
    NotPositiveDefinite { row: usize },

    #[error("monotone iteration did not converge after {iterations} iterations: {reason}")]
    NoConvergence {
        reason: PicardFailure,
        iterations: usize,
    },

    #[error("monotone iteration lost monotonicity at node {node} (drop {drop:e})")]
    MonotonicityViolated { node: usize, drop: f64 },

    #[error("Newton iteration diverged: {0}")]
    NewtonDiverged(String),

    #[error("continuation retained {retained} of {requested} amplitudes")]
    ContinuationFailed { retained: usize, requested: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    EigenNonConvergence { iterations: usize, residual: f64 },

    #[error("closed-form supremum {closed_form} disagrees with grid scan {grid}")]
    GridMismatch { closed_form: f64, grid: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
