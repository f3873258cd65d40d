//! Crate-wide error type and exit-code mapping.

use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Geometry that violates a precondition (support outside grid,
    /// domain touching the box boundary, measure support touching the
    /// interface, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A scalar parameter out of its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Point query outside the grid rectangle.
    #[error("point ({0}, {1}) outside the grid")]
    OutOfDomain(f64, f64),

    /// Conjugate gradients did not reach the requested residual.
    #[error("linear solver failed to converge: final relative residual {final_residual:.3e} after {iterations} iterations")]
    SolverFailure {
        iterations: usize,
        final_residual: f64,
        /// Relative residual norms, one per iteration.
        residual_history: Vec<f64>,
    },

    /// Outer iteration hit its cap before meeting the stopping rule.
    #[error("did not converge in {iterations} iterations (last boundary sup {last_sup:.3e})")]
    NonConvergence { iterations: usize, last_sup: f64 },

    /// Level set lost its zero crossing (domain vanished or filled the box).
    #[error("degenerate state: {0}")]
    Degenerate(String),

    /// A property that must hold for any valid solution was violated by a
    /// run that otherwise claimed success.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the CLI: 0 converged, 2 not converged,
    /// 3 configuration error, 4 invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parameter(_) | Error::Geometry(_) => 3,
            Error::InvariantViolation(_) => 4,
            Error::Io(_) | Error::Json(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
