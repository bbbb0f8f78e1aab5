//! Scalar special-function kernels: Pochhammer symbols, terminating and
//! convergent ₂F₁ sums, Gegenbauer polynomials, and Gauss–Jacobi quadrature
//! on [0, 1] with a `t^β` endpoint weight.

use crate::error::{Error, Result};
use crate::linalg::tridiag_ql;
use crate::scalar::Scalar;

/// Rising factorial a(a+1)···(a+k−1); empty product for k = 0.
pub fn pochhammer<S: Scalar>(a: S, k: u32) -> S {
    let mut r = S::one();
    for j in 0..k {
        r *= a + S::from_i64(j as i64);
    }
    r
}

/// Terminating hypergeometric sum Σ_{j=0}^{w} (−w)_j (b)_j / ((c)_j j!) z^j.
///
/// Errors if c hits a nonpositive integer before the series truncates.
pub fn hyp2f1_terminating<S: Scalar>(w: u32, b: S, c: S, z: S) -> Result<S> {
    let mut sum = S::one();
    let mut term = S::one();
    for j in 0..w {
        let jf = S::from_i64(j as i64);
        let cj = c + jf;
        if cj == S::zero() {
            return Err(Error::HypergeometricPole { j });
        }
        term *= (jf - S::from_i64(w as i64)) * (b + jf) / (cj * (jf + S::one())) * z;
        sum += term;
    }
    Ok(sum)
}

/// Convergent Gauss series ₂F₁(a, b; c; z) for real parameters and |z| < 1.
///
/// Terminates early when `a` or `b` is a nonpositive integer. This is the
/// minimal evaluator the closed-form M entries need for odd n, where the
/// first parameter −n/2+1 is a negative half-integer; no transformations,
/// no |z| ≥ 1.
pub fn hyp2f1_series<S: Scalar>(a: S, b: S, c: S, z: S) -> Result<S> {
    if z.abs() >= S::one() {
        return Err(Error::SeriesNonConvergence { z: z.to_f64() });
    }
    let mut sum = S::one();
    let mut term = S::one();
    let eps = S::epsilon();
    for j in 0..100_000u32 {
        let jf = S::from_i64(j as i64);
        let aj = a + jf;
        let bj = b + jf;
        if aj == S::zero() || bj == S::zero() {
            return Ok(sum);
        }
        let cj = c + jf;
        if cj == S::zero() {
            return Err(Error::HypergeometricPole { j });
        }
        term *= aj * bj / (cj * (jf + S::one())) * z;
        sum += term;
        if term.abs() <= eps * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::SeriesNonConvergence { z: z.to_f64() })
}

/// Gegenbauer polynomial C_w^λ(x) by the three-term recurrence
/// w C_w = 2x(w+λ−1) C_{w−1} − (w+2λ−2) C_{w−2}, seeded by C_0 = 1,
/// C_1 = 2λx. Negative degrees return 0 (the C_{−1} = C_{−2} = 0
/// convention the matrix polynomials rely on).
pub fn gegenbauer<S: Scalar>(w: i64, lambda: S, x: S) -> S {
    if w < 0 {
        return S::zero();
    }
    if w == 0 {
        return S::one();
    }
    let two = S::from_i64(2);
    let mut prev = S::one();
    let mut cur = two * lambda * x;
    for k in 2..=w {
        let kf = S::from_i64(k);
        let next = (two * x * (kf + lambda - S::one()) * cur
            - (kf + two * lambda - two) * prev)
            / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// All of C_0^λ(x) .. C_wmax^λ(x) in one recurrence pass.
pub fn gegenbauer_sequence<S: Scalar>(wmax: usize, lambda: S, x: S) -> Vec<S> {
    let mut out = Vec::with_capacity(wmax + 1);
    out.push(S::one());
    if wmax == 0 {
        return out;
    }
    let two = S::from_i64(2);
    out.push(two * lambda * x);
    for k in 2..=wmax {
        let kf = S::from_i64(k as i64);
        let next = (two * x * (kf + lambda - S::one()) * out[k - 1]
            - (kf + two * lambda - two) * out[k - 2])
            / kf;
        out.push(next);
    }
    out
}

/// Nodes and weights for ∫₀¹ t^β g(t) dt ≈ Σ wᵢ g(tᵢ), exact for
/// polynomials g of degree ≤ 2·order−1.
#[derive(Clone, Debug)]
pub struct QuadratureRule<S> {
    pub nodes: Vec<S>,
    pub weights: Vec<S>,
    pub beta: S,
    pub order: usize,
}

impl<S: Scalar> QuadratureRule<S> {
    pub fn integrate(&self, mut g: impl FnMut(S) -> S) -> S {
        let mut acc = S::zero();
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * g(*t);
        }
        acc
    }
}

/// Golub–Welsch construction for the weight t^β on [0, 1]: the symmetric
/// tridiagonal matrix of the monic Jacobi recurrence is diagonalized by QL,
/// nodes are its eigenvalues and weights come from the squared first
/// eigenvector components scaled by the zeroth moment 1/(β+1).
pub fn gauss_jacobi_rule<S: Scalar>(order: usize, beta: S) -> Result<QuadratureRule<S>> {
    if order == 0 {
        return Err(Error::InvalidParams("quadrature order must be >= 1".into()));
    }
    let neg_one = -S::one();
    if !(beta > neg_one) {
        return Err(Error::InvalidParams(format!(
            "Jacobi exponent beta must be > -1, got {}",
            beta.to_f64()
        )));
    }
    let one = S::one();
    let two = S::from_i64(2);
    let half = one / two;

    // Monic recurrence on [0,1]:
    //   a_0 = (β+1)/(β+2),  a_k = (1 + β²/((2k+β)(2k+β+2)))/2
    //   b_0 = 1/(β+1),      b_k = k²(k+β)² / ((2k+β)²(2k+β+1)(2k+β−1))
    let mut d = Vec::with_capacity(order);
    let mut e = Vec::with_capacity(order.saturating_sub(1));
    d.push((beta + one) / (beta + two));
    for k in 1..order {
        let kf = S::from_i64(k as i64);
        let s = two * kf + beta;
        d.push((one + beta * beta / (s * (s + two))) * half);
        let bk = (kf * kf * (kf + beta) * (kf + beta)) / (s * s * (s + one) * (s - one));
        e.push(bk.sqrt());
    }

    let mut z = vec![S::zero(); order];
    z[0] = S::one();
    tridiag_ql(&mut d, &mut e, &mut z)?;

    let mu0 = one / (beta + one);
    let mut pairs: Vec<(S, S)> = d
        .into_iter()
        .zip(z)
        .map(|(node, z0)| (node, mu0 * z0 * z0))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let nodes: Vec<S> = pairs.iter().map(|p| p.0).collect();
    let weights: Vec<S> = pairs.iter().map(|p| p.1).collect();
    for (t, w) in nodes.iter().zip(&weights) {
        if !(*t > S::zero() && *t < one && *w > S::zero()) {
            return Err(Error::EigenNonConvergence {
                off_norm: t.to_f64(),
            });
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        beta,
        order,
    })
}
