//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate parameter: {0}")]
    DegenerateParameter(&'static str),

    #[error("division by zero in terminating hypergeometric series: c + {j} = 0")]
    HypergeometricPole { j: u32 },

    #[error("hypergeometric series did not converge (|z| must be < 1, got {z})")]
    SeriesNonConvergence { z: f64 },

    #[error("quadrature did not converge at order {order} (defect {defect:.3e})")]
    QuadratureNonConvergence { order: usize, defect: f64 },

    #[error("eigensolver did not converge (off-diagonal norm {off_norm:.3e})")]
    EigenNonConvergence { off_norm: f64 },

    #[error("SVD sweep limit reached before column orthogonality")]
    SvdNonConvergence,

    #[error("matrix size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("ambiguous commutant rank decision: gap {gap:.3e} < 1e2")]
    AmbiguousRank { gap: f64 },

    #[error("eigenvector certification failed: residual {residual:.3e} > {tolerance:.3e}")]
    CertificationFailure { residual: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
