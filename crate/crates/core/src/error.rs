//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by construction and decomposition routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input violates a documented precondition (shape, range, ordering).
    #[error("domain error: {0}")]
    Domain(String),

    /// A symmetric matrix required to be positive definite is not.
    #[error("not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// A numerical procedure failed to converge or lost rank.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An SR pivot `u^T J v` vanished; the column pair spans an isotropic plane.
    #[error("isotropic range: {0}")]
    IsotropicRange(String),

    /// Gram-Schmidt ran out of independent columns; the perturbation is far
    /// outside the regime where the alignment is meaningful.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Too few usable data points for a fit or a scan.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
