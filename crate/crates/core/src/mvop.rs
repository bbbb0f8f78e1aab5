//! The 2×2 matrix-valued weight on [−1, 1], its orthogonal polynomial
//! sequence, their norms, and the orthonormal sequence.
//!
//! The weight is
//!
//! ```text
//! W(x) = (1 − x²)^(n/2 − 1) · [ p x² + n − p    −n x            ]
//!                             [ −n x             (n − p) x² + p ]
//! ```
//!
//! for an integer n ≥ 1 and real 0 < p < n. The attached monic-normalized
//! polynomial sequence P_w has entries built from Gegenbauer polynomials of
//! parameters (n+1)/2 and (n+3)/2; `norm_squared` gives the diagonal matrix
//! ⟨P_w, P_w⟩ in closed form, and Q_w = S_w P_w with S_w = ⟨P_w,P_w⟩^(−1/2)
//! is orthonormal. Everything is entrywise rational in (x, p) times
//! half-integer Γ-ratios, so all scalars stay in the generic [`Scalar`]
//! field extended by square roots.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::gegenbauer_sequence;

/// Problem quadruple (n, p, N, α).
///
/// `n` is the sphere dimension, `p` the real weight parameter in (0, n),
/// `time_level` the truncation level N (indices 0..=N are kept), and
/// `alpha` the band-limiting endpoint in (−1, 1] (1 only makes sense for
/// full-interval diagnostics, where the limiting matrix is the identity).
#[derive(Clone, Copy, Debug)]
pub struct Params<S> {
    pub n: u32,
    pub p: S,
    pub time_level: usize,
    pub alpha: S,
}

impl<S: Scalar> Params<S> {
    pub fn new(n: u32, p: S, time_level: usize, alpha: S) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParams("n must be a positive integer".into()));
        }
        if !(p > S::zero() && p < S::from_i64(n as i64)) {
            return Err(Error::InvalidParams(format!(
                "p must satisfy 0 < p < n, got p = {}, n = {}",
                p.to_f64(),
                n
            )));
        }
        if !(alpha > -S::one() && alpha <= S::one()) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in (-1, 1], got {}",
                alpha.to_f64()
            )));
        }
        Ok(Params {
            n,
            p,
            time_level,
            alpha,
        })
    }

    /// Total matrix size 2(N+1).
    pub fn size(&self) -> usize {
        2 * (self.time_level + 1)
    }

    pub fn n_scalar(&self) -> S {
        S::from_i64(self.n as i64)
    }

    /// n = 2p degenerates the closed-form L1/L2 entries (1/(n−2p) factors).
    pub fn is_half_degenerate(&self) -> bool {
        self.n_scalar() == self.p + self.p
    }

    pub fn is_alpha_zero(&self) -> bool {
        self.alpha == S::zero()
    }

    /// Same problem with p replaced by n − p (the J-duality partner).
    pub fn dual(&self) -> Params<S> {
        Params {
            n: self.n,
            p: self.n_scalar() - self.p,
            time_level: self.time_level,
            alpha: self.alpha,
        }
    }
}

/// A real 2×2 block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2<S> {
    pub a11: S,
    pub a12: S,
    pub a21: S,
    pub a22: S,
}

impl<S: Scalar> Matrix2<S> {
    pub fn new(a11: S, a12: S, a21: S, a22: S) -> Self {
        Matrix2 { a11, a12, a21, a22 }
    }

    pub fn zero() -> Self {
        Matrix2::new(S::zero(), S::zero(), S::zero(), S::zero())
    }

    pub fn identity() -> Self {
        Matrix2::new(S::one(), S::zero(), S::zero(), S::one())
    }

    pub fn diag(a: S, b: S) -> Self {
        Matrix2::new(a, S::zero(), S::zero(), b)
    }

    pub fn scale(self, s: S) -> Self {
        Matrix2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn add(self, o: Matrix2<S>) -> Self {
        Matrix2::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }

    pub fn sub(self, o: Matrix2<S>) -> Self {
        Matrix2::new(
            self.a11 - o.a11,
            self.a12 - o.a12,
            self.a21 - o.a21,
            self.a22 - o.a22,
        )
    }

    pub fn mul(self, o: Matrix2<S>) -> Self {
        Matrix2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn transpose(self) -> Self {
        Matrix2::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Conjugation by J = [[0,1],[1,0]]: swaps both indices.
    pub fn conj_by_j(self) -> Self {
        Matrix2::new(self.a22, self.a21, self.a12, self.a11)
    }

    pub fn max_abs(self) -> S {
        self.a11
            .abs()
            .max_val(self.a12.abs())
            .max_val(self.a21.abs())
            .max_val(self.a22.abs())
    }

    pub fn det(self) -> S {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(self) -> S {
        self.a11 + self.a22
    }
}

/// Γ(a/2) / Γ(b/2) for positive integers a, b, as an interleaved product of
/// half-integer factors (largest consumed first, so intermediates never
/// exceed the final ratio by much — no overflow for n into the hundreds).
/// Parity mismatches contribute the Γ(1/2) = √π endpoints.
pub(crate) fn gamma_half_ratio<S: Scalar>(mut a2: i64, mut b2: i64) -> S {
    assert!(a2 >= 1 && b2 >= 1, "gamma_half_ratio needs positive arguments");
    let half = S::from_ratio(1, 2);
    let mut r = S::one();
    while a2 > 2 || b2 > 2 {
        if a2 >= b2 {
            a2 -= 2;
            r *= S::from_i64(a2) * half;
        } else {
            b2 -= 2;
            r /= S::from_i64(b2) * half;
        }
    }
    // Γ(1) = 1 needs nothing; each Γ(1/2) endpoint is a √π.
    if a2 == 1 {
        r *= S::pi().sqrt();
    }
    if b2 == 1 {
        r /= S::pi().sqrt();
    }
    r
}

/// The weight matrix W(x); symmetric, and positive definite for |x| < 1.
pub fn weight_eval<S: Scalar>(params: &Params<S>, x: S) -> Matrix2<S> {
    let n = params.n_scalar();
    let p = params.p;
    let pre = (S::one() - x * x).pow_half(params.n as i32 - 2);
    let core = Matrix2::new(p * x * x + n - p, -n * x, -n * x, (n - p) * x * x + p);
    debug_assert!(
        x.abs() >= S::one() || core.det() > S::zero(),
        "weight core must be positive definite strictly inside the interval"
    );
    core.scale(pre)
}

/// The polynomial part of the weight, without the (1−x²)^(n/2−1) prefactor.
/// The quadrature builder absorbs the prefactor into the Jacobi rule.
pub fn weight_core<S: Scalar>(params: &Params<S>, x: S) -> Matrix2<S> {
    let n = params.n_scalar();
    let p = params.p;
    Matrix2::new(p * x * x + n - p, -n * x, -n * x, (n - p) * x * x + p)
}

/// P_0 .. P_wmax at a point, sharing the two Gegenbauer recurrences.
pub fn p_eval_sequence<S: Scalar>(params: &Params<S>, wmax: usize, x: S) -> Vec<Matrix2<S>> {
    let n = params.n_scalar();
    let p = params.p;
    let lam1 = (n + S::one()) / S::from_i64(2);
    let lam3 = (n + S::from_i64(3)) / S::from_i64(2);
    let c1 = gegenbauer_sequence(wmax, lam1, x);
    let c3 = if wmax >= 1 {
        gegenbauer_sequence(wmax - 1, lam3, x)
    } else {
        Vec::new()
    };
    let g3 = |w: i64| -> S {
        if w < 0 {
            S::zero()
        } else {
            c3[w as usize]
        }
    };
    (0..=wmax)
        .map(|w| {
            let wf = S::from_i64(w as i64);
            let wi = w as i64;
            let diag = c1[w] / (n + S::one());
            Matrix2::new(
                diag + g3(wi - 2) / (p + wf),
                g3(wi - 1) / (p + wf),
                g3(wi - 1) / (n - p + wf),
                diag + g3(wi - 2) / (n - p + wf),
            )
        })
        .collect()
}

/// The w-th matrix orthogonal polynomial P_w(x).
pub fn p_eval<S: Scalar>(params: &Params<S>, w: usize, x: S) -> Matrix2<S> {
    p_eval_sequence(params, w, x).pop().unwrap()
}

/// ⟨P_w, P_w⟩ over [−1, 1]: a diagonal positive matrix,
///
/// ```text
/// √π 2^⌊w/2⌋ Γ(n/2+1+⌊w/2⌋) Π_{k=0}^{⌊(w−1)/2⌋}(n+2k+1)
/// ───────────────────────────────────────────────────── ·
///        w! (n+1)(n+2w+1) Γ(n/2+3/2)
///
///        diag( p(n−p+w+1)/(p+w) , (n−p)(p+w+1)/(n−p+w) )
/// ```
pub fn norm_squared<S: Scalar>(params: &Params<S>, w: usize) -> Matrix2<S> {
    let n = params.n as i64;
    let nf = params.n_scalar();
    let p = params.p;
    let wf = S::from_i64(w as i64);
    let half_w = (w / 2) as i64;

    // √π Γ(n/2+1+⌊w/2⌋) / Γ(n/2+3/2) with half-integer arguments.
    let mut pre = S::pi().sqrt() * gamma_half_ratio::<S>(n + 2 + 2 * half_w, n + 3);
    pre *= S::from_i64(2).powi(half_w as i32);
    if w >= 1 {
        for k in 0..=((w as i64 - 1) / 2) {
            pre *= S::from_i64(n + 2 * k + 1);
        }
    }
    let mut fact = S::one();
    for j in 2..=w as i64 {
        fact *= S::from_i64(j);
    }
    pre /= fact * (nf + S::one()) * (nf + wf + wf + S::one());

    Matrix2::diag(
        pre * p * (nf - p + wf + S::one()) / (p + wf),
        pre * (nf - p) * (p + wf + S::one()) / (nf - p + wf),
    )
}

/// S_w = ⟨P_w, P_w⟩^(−1/2), the diagonal normalizer with Q_w = S_w P_w.
pub fn normalizer<S: Scalar>(params: &Params<S>, w: usize) -> Matrix2<S> {
    let n2 = norm_squared(params, w);
    Matrix2::diag(S::one() / n2.a11.sqrt(), S::one() / n2.a22.sqrt())
}

/// Q_0 .. Q_wmax at a point.
pub fn q_eval_sequence<S: Scalar>(params: &Params<S>, wmax: usize, x: S) -> Vec<Matrix2<S>> {
    p_eval_sequence(params, wmax, x)
        .into_iter()
        .enumerate()
        .map(|(w, pw)| normalizer(params, w).mul(pw))
        .collect()
}

/// The w-th orthonormal polynomial Q_w(x) = S_w P_w(x).
pub fn q_eval<S: Scalar>(params: &Params<S>, w: usize, x: S) -> Matrix2<S> {
    normalizer(params, w).mul(p_eval(params, w, x))
}
