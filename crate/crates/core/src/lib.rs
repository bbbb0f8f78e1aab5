//! Time-and-band limiting for 2x2 matrix-valued orthogonal polynomials on
//! the n-sphere.
//!
//! Expansions in the orthonormal matrix polynomials attached to the weight
//! W(x) = (1-x^2)^(n/2-1)[[px^2+n-p, -nx],[-nx, (n-p)x^2+p]] play the role
//! of a Fourier transform between coefficient space and the interval
//! [-1, 1]. Truncating the expansion at level N (time limiting) and
//! restricting functions to [-1, alpha] (band limiting) concentrates into
//! the symmetric matrix M built by [`limiting::build_m_quadrature`], whose
//! spectrum clusters against 1 as alpha -> 1 and makes its eigenvectors
//! numerically untrustworthy.
//!
//! The remedy implemented here: block-tridiagonal symmetric matrices
//! (`commutant::build_l1` and friends) that commute with M exactly and have
//! well-separated spectra, so their eigenvectors are eigenvectors of M that
//! can be computed stably ([`spectral::stable_m_eigenbasis`]). The
//! [`commutant::solve_commutant`] solver recovers the full commutant from
//! scratch with an explicit rank-decision policy.
//!
//! Everything is generic over [`scalar::Scalar`]: plain `f64` or the
//! double-double [`scalar::Df64`] for the cases where M sits within 1e-10
//! of the identity and f64 cannot resolve the structure being verified.

pub mod benchmark;
pub mod commutant;
pub mod error;
pub mod limiting;
pub mod linalg;
pub mod mvop;
pub mod output;
pub mod scalar;
pub mod special;
pub mod spectral;
