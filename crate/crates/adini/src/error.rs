//! Library error type.

use thiserror::Error;

/// Errors reported by the plate-element library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix expected to be SPD produced a non-positive Cholesky pivot,
    /// which signals an assembly or boundary-condition bug upstream.
    #[error("matrix not positive definite: pivot {pivot:.6e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("conjugate gradient did not converge in {max_iter} iterations (relative residual {residual:.6e})")]
    NoConvergence { max_iter: usize, residual: f64 },

    #[error("field '{name}' does not support derivative order ({dx},{dy})")]
    UnsupportedDerivative { name: String, dx: u32, dy: u32 },

    #[error("degenerate solution: {0}")]
    DegenerateSolution(String),

    /// The error-decomposition identity failed beyond its tolerance; with a
    /// true Galerkin solution this indicates an assembly or solver bug.
    #[error("identity violation: residual {residual:.6e} exceeds tolerance {tol:.6e}")]
    IdentityViolation { residual: f64, tol: f64 },

    #[error("internal error: {0}")]
    Internal(String),
}
