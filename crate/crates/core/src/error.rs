use thiserror::Error;

/// Errors raised by the solvers and assembly routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {value} outside the domain [-1, 1]")]
    Domain { value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{what} did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        best_residual: f64,
    },

    #[error("matrix is singular at pivot index {pivot_index}")]
    SingularMatrix { pivot_index: usize },

    #[error("resonance: shifted system {index} is singular")]
    Resonance { index: usize },

    #[error("point set is not admissible: {0}")]
    Admissibility(String),

    #[error("recurrence overflow at degree {degree}; use the residual form instead")]
    Overflow { degree: usize },

    #[error("initial data incompatible with boundary condition: u0(x_left) = {value:e}")]
    Incompatible { value: f64 },

    #[error("Newton iteration diverged at step {iteration} (residual {residual:e})")]
    NewtonDivergence { iteration: usize, residual: f64 },

    #[error("GMRES stagnated at relative residual {relative_residual:e}")]
    GmresStagnation { relative_residual: f64 },

    #[error("matrix is too ill-conditioned (estimate {estimate:e})")]
    IllConditioned { estimate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
