//! The time-and-band limiting matrix M.
//!
//! M is the 2(N+1) × 2(N+1) symmetric matrix whose (i,j) block is
//! ∫_{−1}^{α} Q_i(x) W(x) Q_j(x)ᵀ dx. Two independent construction routes
//! are provided:
//!
//! * [`build_m_quadrature`] — the substitution x = −1 + (1+α)t maps the
//!   band to [0, 1]; the (1+x)^(n/2−1) endpoint factor of the weight is
//!   absorbed exactly by a Gauss–Jacobi rule with β = n/2 − 1, leaving the
//!   smooth remainder (2 − (1+α)t)^(n/2−1) · Q_i · core · Q_jᵀ. The order
//!   doubles until entries settle to `Scalar::quad_tol()`.
//!
//! * [`build_m_closed_form`] — assembles M entirely from closed forms: the
//!   explicit hypergeometric M⁰⁰ entries, (1−α²)^(n/2) Gegenbauer products
//!   for all block off-diagonal entries and for the diagonal entries of the
//!   off-diagonal blocks, and the main-diagonal recursion that follows from
//!   commutation with L1 (which is why this route needs α ≠ 0 and n ≠ 2p).
//!
//! The two routes agree to the quadrature tolerance and serve as each
//! other's oracle in the test suites.

use crate::commutant::build_l1;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::mvop::{
    gamma_half_ratio, normalizer, q_eval_sequence, weight_core, Matrix2, Params,
};
use crate::scalar::Scalar;
use crate::special::{gauss_jacobi_rule, gegenbauer_sequence, hyp2f1_series};

/// Symmetric 2(N+1) × 2(N+1) matrix organized as (N+1)² blocks of 2×2.
///
/// Block (i, j) occupies rows {2i, 2i+1} and columns {2j, 2j+1} (0-based;
/// the 1-based convention in the block/flat identities shifts by one).
#[derive(Clone, Debug)]
pub struct BlockMatrix<S> {
    level: usize,
    mat: Mat<S>,
}

impl<S: Scalar> BlockMatrix<S> {
    pub fn zeros(level: usize) -> Self {
        BlockMatrix {
            level,
            mat: Mat::zeros(2 * (level + 1), 2 * (level + 1)),
        }
    }

    pub fn identity(level: usize) -> Self {
        BlockMatrix {
            level,
            mat: Mat::identity(2 * (level + 1)),
        }
    }

    /// Time-limiting level N.
    pub fn level(&self) -> usize {
        self.level
    }

    /// Total size 2(N+1).
    pub fn size(&self) -> usize {
        2 * (self.level + 1)
    }

    pub fn block(&self, i: usize, j: usize) -> Matrix2<S> {
        Matrix2::new(
            self.mat[(2 * i, 2 * j)],
            self.mat[(2 * i, 2 * j + 1)],
            self.mat[(2 * i + 1, 2 * j)],
            self.mat[(2 * i + 1, 2 * j + 1)],
        )
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: Matrix2<S>) {
        self.mat[(2 * i, 2 * j)] = b.a11;
        self.mat[(2 * i, 2 * j + 1)] = b.a12;
        self.mat[(2 * i + 1, 2 * j)] = b.a21;
        self.mat[(2 * i + 1, 2 * j + 1)] = b.a22;
    }

    /// Flat entry, 0-based.
    pub fn entry(&self, r: usize, c: usize) -> S {
        self.mat[(r, c)]
    }

    pub fn set_entry(&mut self, r: usize, c: usize, v: S) {
        self.mat[(r, c)] = v;
    }

    pub fn as_mat(&self) -> &Mat<S> {
        &self.mat
    }

    pub fn from_mat(level: usize, mat: Mat<S>) -> Self {
        assert_eq!(mat.rows(), 2 * (level + 1));
        assert_eq!(mat.cols(), 2 * (level + 1));
        BlockMatrix { level, mat }
    }

    pub fn max_abs(&self) -> S {
        self.mat.max_abs()
    }

    pub fn sub_max_abs(&self, other: &BlockMatrix<S>) -> S {
        self.mat.sub(&other.mat).max_abs()
    }

    pub fn to_f64(&self) -> BlockMatrix<f64> {
        BlockMatrix {
            level: self.level,
            mat: self.mat.to_f64(),
        }
    }
}

/// Which construction produced a matrix, for diagnostics and serialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Quadrature,
    ClosedForm,
    IdentityFastPath,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Quadrature => "quadrature",
            Route::ClosedForm => "closed-form",
            Route::IdentityFastPath => "identity",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuildMeta<S> {
    pub route: Route,
    pub quadrature_order: usize,
    /// max |M − Mᵀ| before symmetrization.
    pub asymmetry_defect: S,
    /// Entry change (relative to the matrix scale) in the last order doubling.
    pub convergence_defect: S,
}

#[derive(Clone, Debug)]
pub struct BuildResult<S> {
    pub matrix: BlockMatrix<S>,
    pub meta: BuildMeta<S>,
}

const ORDER_CAP: usize = 2048;

fn starting_order<S: Scalar>(params: &Params<S>) -> usize {
    (2 * params.time_level + params.n as usize + 8).max(40)
}

/// Single fixed-order quadrature pass over all blocks.
fn quadrature_pass<S: Scalar>(params: &Params<S>, order: usize) -> Result<BlockMatrix<S>> {
    let n = params.n;
    let level = params.time_level;
    let alpha = params.alpha;
    let one = S::one();
    let beta = (S::from_i64(n as i64) - S::from_i64(2)) / S::from_i64(2);
    let rule = gauss_jacobi_rule(order, beta)?;

    let width = one + alpha;
    // (1+α)^(n/2): the (1+α)^(n/2−1) from the absorbed weight factor times
    // the (1+α) Jacobian of the substitution.
    let scale = width.pow_half(n as i32);

    let mut acc = BlockMatrix::zeros(level);
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        let x = -one + width * *t;
        let u = S::from_i64(2) - width * *t;
        let smooth = u.pow_half(n as i32 - 2);
        let qs = q_eval_sequence(params, level, x);
        let core = weight_core(params, x);
        let weight = *w * smooth;
        for i in 0..=level {
            let qi_core = qs[i].mul(core);
            for j in 0..=level {
                let contrib = qi_core.mul(qs[j].transpose()).scale(weight);
                let cur = acc.block(i, j);
                acc.set_block(i, j, cur.add(contrib));
            }
        }
    }
    for i in 0..=level {
        for j in 0..=level {
            acc.set_block(i, j, acc.block(i, j).scale(scale));
        }
    }
    Ok(acc)
}

fn symmetrize<S: Scalar>(m: BlockMatrix<S>) -> (BlockMatrix<S>, S) {
    let defect = m.mat.asymmetry();
    let level = m.level;
    (
        BlockMatrix {
            level,
            mat: m.mat.symmetrized(),
        },
        defect,
    )
}

/// Build M by adaptive Gauss–Jacobi quadrature.
///
/// `order_override` pins the rule order and skips the doubling loop (the
/// CLI exposes this); otherwise the order starts at max(2N+n+8, 40) and
/// doubles until every entry settles, capped at 2048.
pub fn build_m_quadrature_with<S: Scalar>(
    params: &Params<S>,
    order_override: Option<usize>,
) -> Result<BuildResult<S>> {
    if params.alpha == S::one() {
        // Orthonormality over the full interval: M is exactly the identity.
        return Ok(BuildResult {
            matrix: BlockMatrix::identity(params.time_level),
            meta: BuildMeta {
                route: Route::IdentityFastPath,
                quadrature_order: 0,
                asymmetry_defect: S::zero(),
                convergence_defect: S::zero(),
            },
        });
    }

    if let Some(order) = order_override {
        let (m, asym) = symmetrize(quadrature_pass(params, order)?);
        return Ok(BuildResult {
            matrix: m,
            meta: BuildMeta {
                route: Route::Quadrature,
                quadrature_order: order,
                asymmetry_defect: asym,
                convergence_defect: S::zero(),
            },
        });
    }

    let mut order = starting_order(params);
    let mut prev = quadrature_pass(params, order)?;
    loop {
        let next_order = order * 2;
        if next_order > ORDER_CAP {
            return Err(Error::QuadratureNonConvergence {
                order,
                defect: f64::NAN,
            });
        }
        let cur = quadrature_pass(params, next_order)?;
        let defect = cur.sub_max_abs(&prev) / S::one().max_val(cur.max_abs());
        if defect <= S::quad_tol() {
            let (m, asym) = symmetrize(cur);
            return Ok(BuildResult {
                matrix: m,
                meta: BuildMeta {
                    route: Route::Quadrature,
                    quadrature_order: next_order,
                    asymmetry_defect: asym,
                    convergence_defect: defect,
                },
            });
        }
        order = next_order;
        prev = cur;
    }
}

pub fn build_m_quadrature<S: Scalar>(params: &Params<S>) -> Result<BuildResult<S>> {
    build_m_quadrature_with(params, None)
}

/// Closed form for the (0,0) block.
///
/// The off-diagonal entry is Γ(n/2+3/2)(1−α²)^(n/2) / (√(π(p+1)(n−p+1)) Γ(n/2+1)).
/// The (1,1) entry integrates the weight's first diagonal entry through the
/// antiderivative pair x³₂F₁(−n/2+1, 3/2; 5/2; x²)/3 and
/// x·₂F₁(−n/2+1, 1/2; 3/2; x²); evaluating the lower limit contributes the
/// constant 1/2. The (2,2) entry is the (1,1) entry with p ↔ n−p.
/// Valid for every α in (−1, 1), including α = 0.
pub fn m00_closed_form<S: Scalar>(params: &Params<S>) -> Result<Matrix2<S>> {
    let n = params.n as i64;
    let nf = params.n_scalar();
    let alpha = params.alpha;
    let one = S::one();
    let two = S::from_i64(2);
    let half = one / two;
    let sqrt_pi = S::pi().sqrt();

    // Γ(n/2+3/2)/Γ(n/2+1) = Γ((n+3)/2)/Γ((n+2)/2)
    let gpre = gamma_half_ratio::<S>(n + 3, n + 2);
    let z = alpha * alpha;
    let a_param = one - nf / two;

    let diag = |pp: S| -> Result<S> {
        let f1 = hyp2f1_series(a_param, S::from_ratio(3, 2), S::from_ratio(5, 2), z)?;
        let f2 = hyp2f1_series(a_param, half, S::from_ratio(3, 2), z)?;
        let bracket = pp * alpha * z / S::from_i64(3) * f1 + (nf - pp) * alpha * f2;
        Ok(gpre / ((nf - pp + one) * sqrt_pi) * bracket + half)
    };

    let off = gpre * (one - z).pow_half(n as i32)
        / (S::pi() * (params.p + one) * (nf - params.p + one)).sqrt();

    Ok(Matrix2::new(
        diag(params.p)?,
        off,
        off,
        diag(nf - params.p)?,
    ))
}

/// Off-diagonal entries of the un-normalized block:
/// M̃^{i,j}₁₂ = (1−α²)^(n/2) p(n−p) C_i(α) C_j(α) / ((n+1)²(p+i)(n−p+j)),
/// with all Gegenbauers at parameter (n+1)/2. M̃₂₁ swaps the (p+·) pairing.
fn mtilde_offdiag<S: Scalar>(params: &Params<S>, i: usize, j: usize, geg: &[S]) -> (S, S) {
    let nf = params.n_scalar();
    let p = params.p;
    let one = S::one();
    let common = (one - params.alpha * params.alpha).pow_half(params.n as i32)
        * p
        * (nf - p)
        * geg[i]
        * geg[j]
        / ((nf + one) * (nf + one));
    let m12 = common / ((p + S::from_i64(i as i64)) * (nf - p + S::from_i64(j as i64)));
    let m21 = common / ((p + S::from_i64(j as i64)) * (nf - p + S::from_i64(i as i64)));
    (m12, m21)
}

/// (1,1) entry of the un-normalized off-diagonal block (j−1, k−1), for
/// 1 ≤ j ≠ k ≤ N+1 (1-based). The (2,2) entry is this with p ↔ n−p.
fn mtilde_diag_offblock<S: Scalar>(params: &Params<S>, j: usize, k: usize, geg: &[S]) -> S {
    debug_assert!(j != k);
    let nf = params.n_scalar();
    let p = params.p;
    let one = S::one();
    let c = |w: i64| -> S {
        if w < 0 {
            S::zero()
        } else {
            geg[w as usize]
        }
    };
    let jf = S::from_i64(j as i64);
    let kf = S::from_i64(k as i64);
    let ji = j as i64;
    let ki = k as i64;

    let pre = p * (one - params.alpha * params.alpha).pow_half(params.n as i32)
        / ((kf - jf) * (jf + kf + nf - one) * (nf + one) * (nf + one));
    let t1 = jf * (nf - p + jf - one) * (nf - p + kf) / (nf + jf + jf - one)
        * c(ji)
        * c(ki - 1);
    let t2 = kf * (nf - p + kf - one) * (nf - p + jf) / (nf + kf + kf - one)
        * c(ji - 1)
        * c(ki);
    let t3 = (p + jf) * (nf + jf - one) * (nf - p + jf) * (nf - p + kf)
        / ((p + jf - one) * (nf + jf + jf - one))
        * c(ji - 2)
        * c(ki - 1);
    let t4 = (p + kf) * (nf + kf - one) * (nf - p + jf) * (nf - p + kf)
        / ((p + kf - one) * (nf + kf + kf - one))
        * c(ji - 1)
        * c(ki - 2);
    pre * (t1 - t2 + t3 - t4)
}

/// Build M from closed forms alone. Requires α ≠ 0 and n ≠ 2p: the
/// main-diagonal recursion divides by L1 entries carrying 1/α and 1/(n−2p).
pub fn build_m_closed_form<S: Scalar>(params: &Params<S>) -> Result<BuildResult<S>> {
    if params.alpha == S::one() {
        return Ok(BuildResult {
            matrix: BlockMatrix::identity(params.time_level),
            meta: BuildMeta {
                route: Route::IdentityFastPath,
                quadrature_order: 0,
                asymmetry_defect: S::zero(),
                convergence_defect: S::zero(),
            },
        });
    }
    if params.is_alpha_zero() {
        return Err(Error::DegenerateParameter("alpha = 0"));
    }
    if params.is_half_degenerate() {
        return Err(Error::DegenerateParameter("n = 2p"));
    }

    let level = params.time_level;
    let size = 2 * (level + 1);
    let dual = params.dual();
    let lam1 = (params.n_scalar() + S::one()) / S::from_i64(2);
    let geg = gegenbauer_sequence(level + 1, lam1, params.alpha);

    let s_diag: Vec<Matrix2<S>> = (0..=level).map(|w| normalizer(params, w)).collect();

    let mut m = BlockMatrix::<S>::zeros(level);

    // Off-diagonal entries of every block: M^{i,j}_{12} = (S_i)_11 (S_j)_22 M̃^{i,j}_{12}.
    for i in 0..=level {
        for j in 0..=level {
            let (t12, t21) = mtilde_offdiag(params, i, j, &geg);
            m.set_entry(2 * i, 2 * j + 1, s_diag[i].a11 * s_diag[j].a22 * t12);
            m.set_entry(2 * i + 1, 2 * j, s_diag[i].a22 * s_diag[j].a11 * t21);
        }
    }

    // Diagonal entries of the off-diagonal blocks (1-based j ≠ k ranges).
    for j in 1..=(level + 1) {
        for k in 1..=(level + 1) {
            if j == k {
                continue;
            }
            let t11 = mtilde_diag_offblock(params, j, k, &geg);
            m.set_entry(
                2 * (j - 1),
                2 * (k - 1),
                s_diag[j - 1].a11 * s_diag[k - 1].a11 * t11,
            );
            let t22 = mtilde_diag_offblock(&dual, j, k, &geg);
            m.set_entry(
                2 * (j - 1) + 1,
                2 * (k - 1) + 1,
                s_diag[j - 1].a22 * s_diag[k - 1].a22 * t22,
            );
        }
    }

    // Seed the main diagonal from the explicit (0,0) block.
    let m00 = m00_closed_form(params)?;
    m.set_entry(0, 0, m00.a11);

    // Main-diagonal recursion from (M L1 − L1 M) = 0. With 1-based flat
    // indices and the shorthand b_j = (L1)_{2j−1,2j}, d_j = (L1)_{2j,2j},
    // c_j = (L1)_{2j,2j+2}:
    //   entry (2j−1, 2j):  M_{2j,2j} − M_{2j−1,2j−1}
    //       = (M_{2j−1,2j} d_j + M_{2j−1,2j−2} c_{j−1} + M_{2j−1,2j+2} c_j) / b_j
    //   entry (2j, 2j+2):  M_{2j+2,2j+2} − M_{2j,2j}
    //       = (M_{2j,2j+2}(d_{j+1} − d_j) + M_{2j,2j+1} b_{j+1}
    //          − M_{2j−1,2j+2} b_j + M_{2j,2j+4} c_{j+1} − M_{2j−2,2j+2} c_{j−1}) / c_j
    let l1 = build_l1(params)?;
    let ell = |r: i64, c: i64| -> S {
        if r < 1 || c < 1 || r > size as i64 || c > size as i64 {
            S::zero()
        } else {
            l1.get((r - 1) as usize, (c - 1) as usize)
        }
    };
    let mg = |m: &BlockMatrix<S>, r: i64, c: i64| -> S {
        if r < 1 || c < 1 || r > size as i64 || c > size as i64 {
            S::zero()
        } else {
            m.entry((r - 1) as usize, (c - 1) as usize)
        }
    };

    // M_{2,2} from the odd-even relation at j = 1.
    let rel_a = |m: &BlockMatrix<S>, j: i64| -> S {
        mg(m, 2 * j - 1, 2 * j - 1)
            + (mg(m, 2 * j - 1, 2 * j) * ell(2 * j, 2 * j)
                + mg(m, 2 * j - 1, 2 * j - 2) * ell(2 * j - 2, 2 * j)
                + mg(m, 2 * j - 1, 2 * j + 2) * ell(2 * j, 2 * j + 2))
                / ell(2 * j - 1, 2 * j)
    };
    let v = rel_a(&m, 1);
    m.set_entry(1, 1, v);

    for j in 1..=level as i64 {
        // M_{2j+2,2j+2} from the even-even relation at j.
        let v = mg(&m, 2 * j, 2 * j)
            + (mg(&m, 2 * j, 2 * j + 2) * (ell(2 * j + 2, 2 * j + 2) - ell(2 * j, 2 * j))
                + mg(&m, 2 * j, 2 * j + 1) * ell(2 * j + 1, 2 * j + 2)
                - mg(&m, 2 * j - 1, 2 * j + 2) * ell(2 * j - 1, 2 * j)
                + mg(&m, 2 * j, 2 * j + 4) * ell(2 * j + 2, 2 * j + 4)
                - mg(&m, 2 * j - 2, 2 * j + 2) * ell(2 * j - 2, 2 * j))
                / ell(2 * j, 2 * j + 2);
        m.set_entry((2 * j + 1) as usize, (2 * j + 1) as usize, v);
        // M_{2j+1,2j+1} by rearranging the odd-even relation at j+1.
        let jf = j + 1;
        let v = mg(&m, 2 * jf, 2 * jf)
            - (mg(&m, 2 * jf - 1, 2 * jf) * ell(2 * jf, 2 * jf)
                + mg(&m, 2 * jf - 1, 2 * jf - 2) * ell(2 * jf - 2, 2 * jf)
                + mg(&m, 2 * jf - 1, 2 * jf + 2) * ell(2 * jf, 2 * jf + 2))
                / ell(2 * jf - 1, 2 * jf);
        m.set_entry((2 * j) as usize, (2 * j) as usize, v);
    }

    let (m, asym) = symmetrize(m);
    Ok(BuildResult {
        matrix: m,
        meta: BuildMeta {
            route: Route::ClosedForm,
            quadrature_order: 0,
            asymmetry_defect: asym,
            convergence_defect: S::zero(),
        },
    })
}

/// Conjugate every block by J = [[0,1],[1,0]]. The result is the limiting
/// matrix of the dual problem (p replaced by n − p).
pub fn duality_map<S: Scalar>(m: &BlockMatrix<S>) -> BlockMatrix<S> {
    let level = m.level();
    let mut out = BlockMatrix::zeros(level);
    for i in 0..=level {
        for j in 0..=level {
            out.set_block(i, j, m.block(i, j).conj_by_j());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jacobi_eigen;

    fn params(n: u32, p: f64, nn: usize, alpha: f64) -> Params<f64> {
        Params::new(n, p, nn, alpha).unwrap()
    }

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    /// 40-digit reference for M at (n, p, N, α) = (27, 15, 2, 9/10).
    const M_REFERENCE: [[f64; 6]; 6] = [
        [
            0.9999999999701493352831,
            2.707122030207417117953e-11,
            -1.373905184556912834651e-10,
            1.24384265916975919078e-10,
            -4.524403025341520999808e-10,
            4.089545933055766088897e-10,
        ],
        [
            2.707122030207417117953e-11,
            0.9999999999752173740677,
            1.24510009546652983489e-10,
            -1.139656245594900226163e-10,
            4.097056583888293804903e-10,
            -3.75049969376370764718e-10,
        ],
        [
            -1.373905184556912834651e-10,
            1.24510009546652983489e-10,
            0.9999999993675740039055,
            5.720867387566377705578e-10,
            -2.082904750076054460377e-9,
            1.880925194669690270129e-9,
        ],
        [
            1.24384265916975919078e-10,
            -1.139656245594900226163e-10,
            5.720867387566377705578e-10,
            0.9999999994758426442265,
            1.882476555991133903065e-9,
            -1.725219093837669849373e-9,
        ],
        [
            -4.524403025341520999808e-10,
            4.097056583888293804903e-10,
            -2.082904750076054460377e-9,
            1.882476555991133903065e-9,
            0.9999999931389631725609,
            6.189267016107124713214e-9,
        ],
        [
            4.089545933055766088897e-10,
            -3.75049969376370764718e-10,
            1.880925194669690270129e-9,
            -1.725219093837669849373e-9,
            6.189267016107124713214e-9,
            0.9999999943206219222909,
        ],
    ];

    #[test]
    fn quadrature_matches_reference_case() {
        let pr = params(27, 15.0, 2, 0.9);
        let built = build_m_quadrature(&pr).unwrap();
        let m = &built.matrix;
        for r in 0..6 {
            for c in 0..6 {
                approx(m.entry(r, c), M_REFERENCE[r][c], 2e-14);
            }
        }
        assert_eq!(built.meta.route, Route::Quadrature);
        assert!(built.meta.asymmetry_defect < 1e-14);
    }

    #[test]
    fn closed_form_matches_reference_case() {
        let pr = params(27, 15.0, 2, 0.9);
        let built = build_m_closed_form(&pr).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                approx(built.matrix.entry(r, c), M_REFERENCE[r][c], 2e-14);
            }
        }
    }

    #[test]
    fn alpha_one_is_identity() {
        let pr = params(9, 2.5, 3, 1.0);
        let built = build_m_quadrature(&pr).unwrap();
        assert_eq!(built.meta.route, Route::IdentityFastPath);
        let d = built
            .matrix
            .as_mat()
            .sub(&Mat::identity(8))
            .max_abs();
        assert!(d <= 1e-12);
        // And near-identity when integrating with alpha just below 1 is not
        // required here; orthonormality already covers it.
    }

    #[test]
    fn m00_offdiagonal_closed_form() {
        // Block (0,0) entry (1,2) = Γ(n/2+3/2)(1−α²)^(n/2)/(√(π(p+1)(n−p+1)) Γ(n/2+1)).
        for &(n, p, alpha) in &[(8u32, 3.0f64, 0.5f64), (27, 15.0, 0.9), (3, 1.3, -0.4)] {
            let pr = params(n, p, 2, alpha);
            let built = build_m_quadrature(&pr).unwrap();
            let got = built.matrix.entry(0, 1);
            let nf = n as f64;
            let want = gamma_half_ratio::<f64>(n as i64 + 3, n as i64 + 2)
                * (1.0 - alpha * alpha).pow_half(n as i32)
                / (std::f64::consts::PI * (p + 1.0) * (nf - p + 1.0)).sqrt();
            // Quadrature carries ~1e-15 absolute error from O(1) integrand
            // values, so the comparison is absolute.
            approx(got, want, 1e-13);
        }
    }

    #[test]
    fn m00_frozen_values() {
        // (n, p, α) = (8, 3, 1/2), 40-digit references.
        let pr = params(8, 3.0, 0, 0.5);
        let m00 = m00_closed_form(&pr).unwrap();
        approx(m00.a11, 0.918628692626953125, 1e-15);
        approx(m00.a12, 0.07947124581287738695208702, 1e-15);
    }

    #[test]
    fn m00_at_alpha_zero_diagonal_halves() {
        // At α = 0 the hypergeometric bracket vanishes, each diagonal entry
        // is exactly 1/2, and the quadrature route agrees.
        let pr = params(9, 2.7, 0, 0.0);
        let m00 = m00_closed_form(&pr).unwrap();
        assert_eq!(m00.a11, 0.5);
        assert_eq!(m00.a22, 0.5);
        approx(m00.a11 + m00.a22, 1.0, 0.0);
        let quad = build_m_quadrature(&pr).unwrap();
        approx(quad.matrix.entry(0, 0), 0.5, 1e-14);
        approx(quad.matrix.entry(1, 1), 0.5, 1e-14);
    }

    #[test]
    fn closed_form_equals_quadrature_generic() {
        let pr = params(8, 3.0, 4, 0.5);
        let q = build_m_quadrature(&pr).unwrap();
        let c = build_m_closed_form(&pr).unwrap();
        let scale = q.matrix.max_abs().max(1.0);
        assert!(c.matrix.sub_max_abs(&q.matrix) <= 1e-9 * scale);
    }

    #[test]
    fn closed_form_rejects_degenerate_parameters() {
        assert!(matches!(
            build_m_closed_form(&params(8, 3.0, 2, 0.0)),
            Err(Error::DegenerateParameter("alpha = 0"))
        ));
        assert!(matches!(
            build_m_closed_form(&params(8, 4.0, 2, 0.5)),
            Err(Error::DegenerateParameter("n = 2p"))
        ));
    }

    #[test]
    fn flat_and_block_indexing_agree() {
        let pr = params(5, 1.9, 3, 0.4);
        let m = build_m_quadrature(&pr).unwrap().matrix;
        for i in 0..=3 {
            for j in 0..=3 {
                let b = m.block(i, j);
                assert_eq!(b.a11, m.entry(2 * i, 2 * j));
                assert_eq!(b.a12, m.entry(2 * i, 2 * j + 1));
                assert_eq!(b.a21, m.entry(2 * i + 1, 2 * j));
                assert_eq!(b.a22, m.entry(2 * i + 1, 2 * j + 1));
            }
        }
    }

    #[test]
    fn duality_map_involution_and_parameter_swap() {
        let pr = params(9, 2.6, 2, 0.35);
        let m = build_m_quadrature(&pr).unwrap().matrix;
        let twice = duality_map(&duality_map(&m));
        assert_eq!(twice.sub_max_abs(&m), 0.0);

        let dual = build_m_quadrature(&pr.dual()).unwrap().matrix;
        assert!(duality_map(&m).sub_max_abs(&dual) <= 1e-12);
    }

    #[test]
    fn self_dual_parameter_is_invariant() {
        let pr = params(8, 4.0, 2, 0.45);
        let m = build_m_quadrature(&pr).unwrap().matrix;
        assert!(duality_map(&m).sub_max_abs(&m) <= 1e-12);
    }

    #[test]
    fn spectrum_inside_unit_interval() {
        for &(n, p, nn, alpha) in &[(8u32, 3.0f64, 4usize, 0.5f64), (3, 1.3, 2, -0.5), (4, 1.0, 3, 0.3)]
        {
            let pr = params(n, p, nn, alpha);
            let m = build_m_quadrature(&pr).unwrap().matrix;
            let (vals, _) = jacobi_eigen(m.as_mat()).unwrap();
            for v in vals {
                assert!(
                    v > 1e-12 && v < 1.0 - 1e-12,
                    "eigenvalue {v} escapes (0,1) at n={n} p={p} N={nn} alpha={alpha}"
                );
            }
        }
    }

    #[test]
    fn monotone_in_alpha() {
        // M(α₂) − M(α₁) is an integral of pointwise-PSD matrices.
        let base = params(6, 2.2, 3, 0.0);
        let alphas = [-0.6, -0.1, 0.4, 0.8];
        for w in alphas.windows(2) {
            let m1 = build_m_quadrature(&params(6, 2.2, 3, w[0])).unwrap().matrix;
            let m2 = build_m_quadrature(&params(6, 2.2, 3, w[1])).unwrap().matrix;
            let diff = m2.as_mat().sub(m1.as_mat());
            let (vals, _) = jacobi_eigen(&diff).unwrap();
            for v in vals {
                assert!(v >= -1e-12, "increment eigenvalue {v} < -1e-12");
            }
        }
        let _ = base;
    }

    #[test]
    fn quadrature_meta_reports_convergence() {
        let pr = params(3, 1.3, 2, 0.7);
        let built = build_m_quadrature(&pr).unwrap();
        assert!(built.meta.convergence_defect <= 1e-12);
        assert!(built.meta.quadrature_order >= 40);
    }

    #[test]
    fn order_override_skips_doubling() {
        let pr = params(8, 3.0, 2, 0.5);
        let built = build_m_quadrature_with(&pr, Some(64)).unwrap();
        assert_eq!(built.meta.quadrature_order, 64);
        let auto = build_m_quadrature(&pr).unwrap();
        assert!(built.matrix.sub_max_abs(&auto.matrix) <= 1e-12);
    }
}
