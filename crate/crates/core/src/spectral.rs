//! Symmetric eigensolver, the back-substitution eigenvector algorithm for
//! L1, spectral-gap diagnostics, and the stable route to eigenvectors of M.
//!
//! The point of the whole construction: M's eigenvalues cluster against 1
//! as α → 1, which makes its eigenvectors numerically ill-determined, while
//! L1 commutes with M and has a well-separated simple spectrum. Eigenvectors
//! of L1 are therefore eigenvectors of M that can be computed stably;
//! [`stable_m_eigenbasis`] implements that route and certifies each vector
//! through its Rayleigh residual against M.

use crate::commutant::{build_l1, BandedSymmetric};
use crate::error::{Error, Result};
use crate::limiting::build_m_quadrature;
use crate::linalg::{dot, jacobi_eigen, norm2, Mat};
use crate::mvop::Params;
use crate::scalar::Scalar;

/// Eigendecomposition of a symmetric matrix: ascending eigenvalues,
/// orthonormal eigenvector columns, the smallest consecutive gap, and the
/// largest per-column residual ‖Av − λv‖.
#[derive(Clone, Debug)]
pub struct Spectrum<S> {
    pub eigenvalues: Vec<S>,
    pub eigenvectors: Mat<S>,
    pub min_gap: S,
    pub residual: S,
}

/// Deterministic symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues ascend; each eigenvector's largest-magnitude component is
/// made positive (lowest index on ties), so identical input bits produce
/// identical output bits.
pub fn symmetric_eigen<S: Scalar>(a: &Mat<S>) -> Result<Spectrum<S>> {
    if a.rows() != a.cols() {
        return Err(Error::SizeMismatch {
            left: a.rows(),
            right: a.cols(),
        });
    }
    let scale = a.max_abs().max_val(S::one());
    if a.asymmetry() > S::from_f64(1e-12) * scale {
        return Err(Error::InvalidParams(format!(
            "matrix is not symmetric (defect {:.3e})",
            a.asymmetry().to_f64()
        )));
    }
    let n = a.rows();
    let (vals, vecs) = jacobi_eigen(a)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Mat::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        eigenvalues.push(vals[old_j]);
        let mut col = vecs.column(old_j);
        fix_sign(&mut col);
        eigenvectors.set_column(new_j, &col);
    }

    let mut residual = S::zero();
    for j in 0..n {
        let v = eigenvectors.column(j);
        let av = a.mul_vec(&v);
        let r: Vec<S> = av
            .iter()
            .zip(&v)
            .map(|(x, y)| *x - eigenvalues[j] * *y)
            .collect();
        residual = residual.max_val(norm2(&r));
    }

    let min_gap = min_consecutive_gap(&eigenvalues);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        min_gap,
        residual,
    })
}

fn min_consecutive_gap<S: Scalar>(vals: &[S]) -> S {
    let mut gap = S::from_f64(f64::INFINITY);
    for w in vals.windows(2) {
        gap = gap.min_val(w[1] - w[0]);
    }
    gap
}

/// Largest-magnitude component positive, ties broken by lowest index.
fn fix_sign<S: Scalar>(v: &mut [S]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < S::zero() {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Result of the back-substitution eigenvector recovery: the unit vector
/// and the defect of the one equation the construction cannot enforce
/// (a multiple of the characteristic polynomial at λ).
#[derive(Clone, Debug)]
pub struct BackSubstitution<S> {
    pub vector: Vec<S>,
    pub defect: S,
}

/// Recover an eigenvector of L1 from its eigenvalue alone.
///
/// With 1-based indices and ℓ = L1 entries: the odd equations give
/// x_{2j−1} = ℓ_{2j−1,2j} x_{2j} / λ; substituting into the even equations
/// leaves the three-term recursion
///
/// ```text
/// ℓ_{2j,2j+2} x_{2j+2} + (ℓ_{2j,2j} − λ + ℓ²_{2j−1,2j}/λ) x_{2j} + ℓ_{2j−2,2j} x_{2j−2} = 0.
/// ```
///
/// The free parameter is the last even component x_{2N+2} = 1; the
/// recursion runs backwards, and the leftover j = 1 equation is returned
/// as the defect (≤ 1e−8 exactly when λ is an eigenvalue).
pub fn l1_eigenvector_backsub<S: Scalar>(
    l1: &BandedSymmetric<S>,
    lambda: S,
) -> Result<BackSubstitution<S>> {
    if lambda == S::zero() {
        return Err(Error::InvalidParams(
            "lambda = 0 is never an eigenvalue of L1 (det(L1) != 0)".into(),
        ));
    }
    let size = l1.size();
    let pairs = size / 2;
    let ell = |r: i64, c: i64| -> S {
        if r < 1 || c < 1 || r > size as i64 || c > size as i64 {
            S::zero()
        } else {
            l1.get((r - 1) as usize, (c - 1) as usize)
        }
    };
    // 1-based storage, x[0] unused.
    let mut x = vec![S::zero(); size + 1];
    x[2 * pairs] = S::one();

    let diag_term = |j: i64| -> S {
        let b = ell(2 * j - 1, 2 * j);
        ell(2 * j, 2 * j) - lambda + b * b / lambda
    };

    for j in (2..=pairs as i64).rev() {
        let c_j = ell(2 * j, 2 * j + 2);
        let upper = if 2 * j + 2 <= size as i64 {
            x[(2 * j + 2) as usize]
        } else {
            S::zero()
        };
        let c_prev = ell(2 * j - 2, 2 * j);
        if c_prev == S::zero() {
            return Err(Error::InvalidParams(
                "vanishing recursion coefficient l_{2j,2j+2}".into(),
            ));
        }
        x[(2 * j - 2) as usize] = -(c_j * upper + diag_term(j) * x[(2 * j) as usize]) / c_prev;
    }

    // The j = 1 equation is the one that cannot be enforced.
    let defect_raw = ell(2, 4) * x[4.min(size)] * if size >= 4 { S::one() } else { S::zero() }
        + diag_term(1) * x[2];

    for j in 1..=pairs as i64 {
        x[(2 * j - 1) as usize] = ell(2 * j - 1, 2 * j) / lambda * x[(2 * j) as usize];
    }

    let mut v: Vec<S> = x[1..].to_vec();
    let norm = norm2(&v);
    for e in v.iter_mut() {
        *e /= norm;
    }
    fix_sign(&mut v);
    Ok(BackSubstitution {
        vector: v,
        defect: defect_raw.abs() / norm,
    })
}

/// Gap diagnostics for a computed spectrum.
#[derive(Clone, Debug)]
pub struct SimplicityReport<S> {
    pub min_gap: S,
    pub spread: S,
    pub tolerance: S,
    pub simple: bool,
    pub gaps: Vec<S>,
}

/// Checks min_gap against the default tolerance 1e−8 · spread and reports
/// the full gap distribution. Report-only: clustered spectra are flagged,
/// not rejected.
pub fn simplicity_check<S: Scalar>(s: &Spectrum<S>) -> SimplicityReport<S> {
    let vals = &s.eigenvalues;
    let gaps: Vec<S> = vals.windows(2).map(|w| w[1] - w[0]).collect();
    let spread = if vals.is_empty() {
        S::zero()
    } else {
        vals[vals.len() - 1] - vals[0]
    };
    let tolerance = S::from_f64(1e-8) * spread;
    SimplicityReport {
        min_gap: s.min_gap,
        spread,
        tolerance,
        simple: s.min_gap > tolerance,
        gaps,
    }
}

/// Overlap structure between two orthonormal column families.
#[derive(Clone, Debug)]
pub struct AlignmentReport<S> {
    /// |yᵀx|.
    pub overlap: Mat<S>,
    /// For each column of y, the matched column of x.
    pub permutation: Vec<usize>,
    /// The matched overlap moduli, one per column of y.
    pub overlaps: Vec<S>,
    /// Columns of y whose best remaining overlap was not matched (empty for
    /// equal column counts).
    pub unmatched: Vec<usize>,
}

/// Computes |yᵀx| and greedily matches each column of y to its
/// maximal-overlap column of x without reuse.
pub fn align_eigenvectors<S: Scalar>(x: &Mat<S>, y: &Mat<S>) -> Result<AlignmentReport<S>> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::SizeMismatch {
            left: x.cols(),
            right: y.cols(),
        });
    }
    for m in [x, y] {
        for j in 0..m.cols() {
            let col = m.column(j);
            let n = norm2(&col);
            if (n - S::one()).abs() > S::from_f64(1e-6) {
                return Err(Error::InvalidParams(format!(
                    "columns must be orthonormal (norm {:.6})",
                    n.to_f64()
                )));
            }
        }
    }

    let k = x.cols();
    let mut overlap = Mat::zeros(k, k);
    for r in 0..k {
        let yc = y.column(r);
        for c in 0..k {
            overlap[(r, c)] = dot(&yc, &x.column(c)).abs();
        }
    }

    let mut used = vec![false; k];
    let mut permutation = Vec::with_capacity(k);
    let mut overlaps = Vec::with_capacity(k);
    for r in 0..k {
        let mut best: Option<usize> = None;
        for c in 0..k {
            if used[c] && best != Some(c) {
                continue;
            }
            if !used[c] && (best.is_none() || overlap[(r, c)] > overlap[(r, best.unwrap())]) {
                best = Some(c);
            }
        }
        let b = best.expect("equal column counts leave a free column");
        used[b] = true;
        permutation.push(b);
        overlaps.push(overlap[(r, b)]);
    }
    Ok(AlignmentReport {
        overlap,
        permutation,
        overlaps,
        unmatched: Vec::new(),
    })
}

/// The stable eigenbasis of M, produced without eigendecomposing M.
#[derive(Clone, Debug)]
pub struct StableEigenbasis<S> {
    /// Eigenvalues are the Rayleigh quotients vᵀMv, ascending; eigenvectors
    /// come from L1.
    pub spectrum: Spectrum<S>,
    /// Eigenvalues of L1 matched to the columns (same order).
    pub l1_eigenvalues: Vec<S>,
    /// Certification residuals ‖Mv − (vᵀMv)v‖ per column.
    pub certification_residuals: Vec<S>,
}

const CERTIFICATION_TOL: f64 = 1e-8;

/// Compute eigenvectors of M via L1: eigendecompose L1 (well-separated
/// spectrum), certify each vector as an M-eigenvector through its Rayleigh
/// residual, and report M-eigenvalues as Rayleigh quotients.
pub fn stable_m_eigenbasis<S: Scalar>(params: &Params<S>) -> Result<StableEigenbasis<S>> {
    let m = build_m_quadrature(params)?.matrix;
    let l1 = build_l1(params)?;
    let l1_spec = symmetric_eigen(&l1.to_dense())?;

    let n = m.size();
    let tol = S::from_f64(CERTIFICATION_TOL);
    let mut entries: Vec<(S, S, Vec<S>, S)> = Vec::with_capacity(n);
    for j in 0..n {
        let v = l1_spec.eigenvectors.column(j);
        let mv = m.as_mat().mul_vec(&v);
        let rho = dot(&v, &mv);
        let r: Vec<S> = mv.iter().zip(&v).map(|(a, b)| *a - rho * *b).collect();
        let res = norm2(&r);
        if res > tol {
            return Err(Error::CertificationFailure {
                residual: res.to_f64(),
                tolerance: CERTIFICATION_TOL,
            });
        }
        entries.push((rho, l1_spec.eigenvalues[j], v, res));
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut eigenvectors = Mat::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut l1_eigenvalues = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut max_res = S::zero();
    for (j, (rho, lam, v, res)) in entries.into_iter().enumerate() {
        eigenvalues.push(rho);
        l1_eigenvalues.push(lam);
        eigenvectors.set_column(j, &v);
        max_res = max_res.max_val(res);
        residuals.push(res);
    }
    let min_gap = min_consecutive_gap(&eigenvalues);
    Ok(StableEigenbasis {
        spectrum: Spectrum {
            eigenvalues,
            eigenvectors,
            min_gap,
            residual: max_res,
        },
        l1_eigenvalues,
        certification_residuals: residuals,
    })
}
