//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured values. Runtime bounds are printed always and enforced
//! in release builds only (debug binaries are unoptimized).
//!
//! Criterion 4 (commutant dimension) is asserted exactly as specified and is
//! expected to fail: the three commuting matrices satisfy the exact linear
//! relation L3 = p(n−p+1)(L1 + L2 − Id)/(n+2), so for N ≥ 2 the commutant of
//! M within symmetric block-tridiagonal matrices is 3-dimensional, not 4.
//! The test prints the measured dimension table and the dependence residual
//! as evidence before failing.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use bandlim::benchmark;
use bandlim::commutant::{
    build_l1, build_l2, build_l3, commutator_norm, dependence_residual, l1_det_eliminated,
    l1_det_formula, solve_commutant,
};
use bandlim::error::Error;
use bandlim::limiting::{
    build_m_closed_form, build_m_quadrature, duality_map, BlockMatrix,
};
use bandlim::linalg::{jacobi_eigen, Mat};
use bandlim::mvop::{q_eval_sequence, weight_core, Matrix2, Params};
use bandlim::scalar::{Df64, Scalar};
use bandlim::special::gauss_jacobi_rule;
use bandlim::spectral::{
    l1_eigenvector_backsub, simplicity_check, stable_m_eigenbasis, symmetric_eigen,
};

const BENCH: (u32, f64, usize, f64) = benchmark::CASE;

fn params(n: u32, p: f64, level: usize, alpha: f64) -> Params<f64> {
    Params::new(n, p, level, alpha).unwrap()
}

/// The acceptance grid: n x p x N x alpha, p deduplicated, n = 2p excluded
/// (it never occurs with these p choices).
fn grid() -> Vec<(u32, f64, usize, f64)> {
    let mut out = Vec::new();
    for &n in &[3u32, 4, 8, 27] {
        let mut ps = vec![1.0, 1.3, n as f64 / 3.0];
        ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ps.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        for &p in &ps {
            if (n as f64 - 2.0 * p).abs() < 1e-12 {
                continue;
            }
            for &level in &[1usize, 2, 5, 10] {
                for &alpha in &[-0.5, 0.3, 0.9] {
                    out.push((n, p, level, alpha));
                }
            }
        }
    }
    out
}

type Key = (u32, u64, usize, u64);

fn cache() -> &'static Mutex<HashMap<Key, BlockMatrix<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, BlockMatrix<f64>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Quadrature-built M, shared across the suite.
fn m_quad(n: u32, p: f64, level: usize, alpha: f64) -> BlockMatrix<f64> {
    let key = (n, p.to_bits(), level, alpha.to_bits());
    if let Some(m) = cache().lock().unwrap().get(&key) {
        return m.clone();
    }
    let m = build_m_quadrature(&params(n, p, level, alpha))
        .unwrap()
        .matrix;
    cache().lock().unwrap().insert(key, m.clone());
    m
}

fn enforce_runtime(name: &str, elapsed: Duration, bound_secs: f64) {
    println!(
        "{name}: runtime {:.3} s (bound {:.0} s, enforced in release builds)",
        elapsed.as_secs_f64(),
        bound_secs
    );
    #[cfg(not(debug_assertions))]
    assert!(
        elapsed.as_secs_f64() < bound_secs,
        "{name} exceeded the {bound_secs} s bound: {:.3} s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_1_l1_eigenvalue_reproduction() {
    let start = Instant::now();
    let (n, p, level, alpha) = BENCH;
    let l1 = build_l1(&params(n, p, level, alpha)).unwrap();
    let spec = symmetric_eigen(&l1.to_dense()).unwrap();
    // The reference table's normalization differs from the entry formulas by
    // the global constant (p+1)(n−p)/((p+2)(n−p+1)) = 192/221, pinned by
    // matching all six reference eigenvalues and the reference eigenvector
    // table; any scalar multiple of L1 is the same commuting operator.
    let scale = benchmark::reference_normalization(n as f64, p);
    let mut max_diff = 0.0f64;
    for (lam, want) in spec.eigenvalues.iter().zip(&benchmark::L1_EIGENVALUES) {
        max_diff = max_diff.max((lam * scale - want).abs());
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 1 {}: L1 eigenvalues match the reference table, max |diff| = {max_diff:.3e} (tol 5e-4, normalization {scale:.12})",
        if max_diff < 5e-4 { "PASS" } else { "FAIL" },
    );
    enforce_runtime("criterion 1", elapsed, 1.0);
    assert!(max_diff < 5e-4);
}

#[test]
fn criterion_2_m_eigenvalue_clustering() {
    // Extended precision: the true margins 1 − λ reach 3.8e-22 at this
    // point, far below anything f64 can certify.
    let start = Instant::now();
    let pr = Params::<Df64>::new(27, Df64::from_i64(15), 2, Df64::from_ratio(9, 10)).unwrap();
    let m = build_m_quadrature(&pr).unwrap().matrix;
    let spec = symmetric_eigen(m.as_mat()).unwrap();
    let mut ok = true;
    let mut worst_margin = f64::INFINITY;
    for lam in &spec.eigenvalues {
        let l = lam.to_f64();
        let inside = *lam > Df64::zero() && *lam < Df64::one();
        let clustered = (l - 1.0).abs() < 0.05;
        ok &= inside && clustered;
        worst_margin = worst_margin.min((Df64::one() - *lam).to_f64());
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 2 {}: all six eigenvalues of M in (0,1) and within 0.05 of 1.0 (smallest margin 1-λ = {worst_margin:.3e}, extended precision)",
        if ok { "PASS" } else { "FAIL" }
    );
    enforce_runtime("criterion 2", elapsed, 1.0);
    assert!(ok);
}

#[test]
fn criterion_3_commutation_grid() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_at = (0u32, 0.0f64, 0usize, 0.0f64, 0usize);
    for (n, p, level, alpha) in grid() {
        let pr = params(n, p, level, alpha);
        let m = build_m_quadrature(&pr).unwrap().matrix;
        let ls = [
            build_l1(&pr).unwrap(),
            build_l2(&pr).unwrap(),
            build_l3(&pr).unwrap(),
        ];
        for (i, l) in ls.iter().enumerate() {
            let c = commutator_norm(m.as_mat(), &l.to_dense()).unwrap();
            if c.normalized > worst {
                worst = c.normalized;
                worst_at = (n, p, level, alpha, i + 1);
            }
        }
        // Share with the other criteria.
        let key = (n, p.to_bits(), level, alpha.to_bits());
        cache().lock().unwrap().entry(key).or_insert(m);
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 3 {}: worst normalized ||[M, L_i]|| = {worst:.3e} at (n={}, p={}, N={}, alpha={}, L{}) (tol 1e-10)",
        if worst <= 1e-10 { "PASS" } else { "FAIL" },
        worst_at.0, worst_at.1, worst_at.2, worst_at.3, worst_at.4
    );
    enforce_runtime("criterion 3", elapsed, 30.0);
    assert!(worst <= 1e-10);
}

#[test]
fn criterion_4_commutant_dimension() {
    // As specified: solve_commutant must return a 4-dimensional kernel with
    // rank gap >= 1e2 on every grid point, and Id, L1, L2, L3 must project
    // into it with residual <= 1e-8. The projection half holds everywhere.
    // The dimension half cannot: L1 + L2 - (n+2)/(p(n-p+1))·L3 = Id exactly,
    // so the span of the four named matrices is 3-dimensional, and for
    // N >= 2 the commutant itself is 3-dimensional at generic parameters.
    let mut failures: Vec<String> = Vec::new();
    let mut worst_projection = 0.0f64;
    for (n, p, level, alpha) in grid() {
        let pr = params(n, p, level, alpha);
        let dep = dependence_residual(&pr).unwrap();
        assert!(
            dep <= 1e-10,
            "dependence identity violated at (n={n}, p={p}): {dep:.3e}"
        );

        // f64 first; fall back to extended precision when the constraint
        // operator is too small for an f64 rank decision (M near Id).
        let outcome: Result<(usize, Option<f64>, f64), String> =
            match solve_commutant(&m_quad(n, p, level, alpha)) {
                Ok(basis) => {
                    let mut proj = basis.projection_residual(&Mat::identity(pr.size()));
                    for l in [build_l1(&pr), build_l2(&pr), build_l3(&pr)] {
                        proj = proj.max_val(basis.projection_residual(&l.unwrap().to_dense()));
                    }
                    Ok((basis.dimension, basis.rank_gap, proj))
                }
                Err(Error::AmbiguousRank { .. }) => {
                    let prx = Params::<Df64>::new(
                        n,
                        Df64::from_f64(p),
                        level,
                        Df64::from_f64(alpha),
                    )
                    .unwrap();
                    let mx = build_m_quadrature(&prx).unwrap().matrix;
                    match solve_commutant(&mx) {
                        Ok(basis) => {
                            let id = Mat::from_fn(pr.size(), pr.size(), |i, j| {
                                if i == j {
                                    Df64::one()
                                } else {
                                    Df64::zero()
                                }
                            });
                            let mut proj = basis.projection_residual(&id);
                            for l in [build_l1(&prx), build_l2(&prx), build_l3(&prx)] {
                                proj =
                                    proj.max_val(basis.projection_residual(&l.unwrap().to_dense()));
                            }
                            Ok((
                                basis.dimension,
                                basis.rank_gap.map(|g| g.to_f64()),
                                proj.to_f64(),
                            ))
                        }
                        Err(e) => Err(format!("{e}")),
                    }
                }
                Err(e) => Err(format!("{e}")),
            };

        match outcome {
            Ok((dim, gap, proj)) => {
                worst_projection = worst_projection.max(proj);
                let gap_ok = gap.map(|g| g >= 1e2).unwrap_or(false);
                if dim != 4 || !gap_ok || proj > 1e-8 {
                    failures.push(format!(
                        "  (n={n}, p={p}, N={level}, alpha={alpha}): dimension {dim}, gap {:?}, projection {proj:.3e}",
                        gap.map(|g| format!("{g:.3e}"))
                    ));
                }
            }
            Err(e) => failures.push(format!(
                "  (n={n}, p={p}, N={level}, alpha={alpha}): {e}"
            )),
        }
    }

    println!(
        "criterion 4 projections: worst residual of Id/L1/L2/L3 against the kernel span = {worst_projection:.3e} (tol 1e-8)"
    );
    assert!(worst_projection <= 1e-8);

    if failures.is_empty() {
        println!("criterion 4 PASS: kernel dimension 4 with gap >= 1e2 on every grid point");
    } else {
        println!(
            "criterion 4 FAIL: kernel dimension differs from 4 on {} of {} grid points:",
            failures.len(),
            grid().len()
        );
        for f in &failures {
            println!("{f}");
        }
        println!(
            "  cause: the exact identity L1 + L2 - (n+2)/(p(n-p+1))*L3 = Id makes the"
        );
        println!(
            "  claimed four-element spanning set 3-dimensional; for N >= 2 the commutant"
        );
        println!(
            "  itself is 3-dimensional at generic parameters (N = 1 is 4 by dof counting)."
        );
        panic!(
            "criterion 4: commutant dimension is not 4 on {} grid points (see the printed table)",
            failures.len()
        );
    }
}

#[test]
fn criterion_5_oracle_equivalence() {
    let mut worst = 0.0f64;
    let mut worst_at = (0u32, 0.0f64, 0usize, 0.0f64);
    for (n, p, level, alpha) in grid() {
        let pr = params(n, p, level, alpha);
        let quad = m_quad(n, p, level, alpha);
        let closed = build_m_closed_form(&pr).unwrap().matrix;
        let rel = closed.sub_max_abs(&quad) / quad.max_abs().max(1.0);
        if rel > worst {
            worst = rel;
            worst_at = (n, p, level, alpha);
        }
    }
    println!(
        "criterion 5 {}: closed form vs quadrature, worst relative discrepancy {worst:.3e} at (n={}, p={}, N={}, alpha={}) (tol 1e-9)",
        if worst <= 1e-9 { "PASS" } else { "FAIL" },
        worst_at.0, worst_at.1, worst_at.2, worst_at.3
    );
    assert!(worst <= 1e-9);
}

#[test]
fn criterion_6_determinant_identity() {
    let mut worst = 0.0f64;
    for (n, p, level, alpha) in grid() {
        let l1 = build_l1(&params(n, p, level, alpha)).unwrap();
        let det = l1_det_eliminated(&l1);
        let formula = l1_det_formula(&l1);
        worst = worst.max((det - formula).abs() / formula.abs());
    }
    println!(
        "criterion 6 {}: determinant identity, worst relative error {worst:.3e} (tol 1e-9)",
        if worst <= 1e-9 { "PASS" } else { "FAIL" }
    );
    assert!(worst <= 1e-9);
}

#[test]
fn criterion_7_back_substitution() {
    let mut worst_entry = 0.0f64;
    let mut worst_defect = 0.0f64;
    for (n, p, level, alpha) in grid() {
        let l1 = build_l1(&params(n, p, level, alpha)).unwrap();
        let spec = symmetric_eigen(&l1.to_dense()).unwrap();
        for (j, lam) in spec.eigenvalues.iter().enumerate() {
            let bs = l1_eigenvector_backsub(&l1, *lam).unwrap();
            worst_defect = worst_defect.max(bs.defect);
            let col = spec.eigenvectors.column(j);
            for (a, b) in col.iter().zip(&bs.vector) {
                worst_entry = worst_entry.max((a - b).abs());
            }
        }
    }
    let ok = worst_entry <= 1e-8 && worst_defect <= 1e-8;
    println!(
        "criterion 7 {}: back-substitution vs eigensolver, worst per-entry diff {worst_entry:.3e}, worst final-equation defect {worst_defect:.3e} (tol 1e-8)",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_8_stable_route_certification() {
    let mut worst = 0.0f64;
    for (n, p, level, alpha) in grid() {
        let basis = stable_m_eigenbasis(&params(n, p, level, alpha)).unwrap();
        for r in &basis.certification_residuals {
            worst = worst.max(*r);
        }
    }
    println!(
        "criterion 8 {}: stable-route certification, worst ||Mv - (v'Mv)v|| = {worst:.3e} (tol 1e-8)",
        if worst <= 1e-8 { "PASS" } else { "FAIL" }
    );
    assert!(worst <= 1e-8);
}

/// Two Gauss–Jacobi panels turn the full-interval Gram integral into the
/// t^β form the rule handles; used as the orthonormality oracle.
fn gram(pr: &Params<f64>, i: usize, j: usize, order: usize) -> Matrix2<f64> {
    let beta = pr.n as f64 / 2.0 - 1.0;
    let rule = gauss_jacobi_rule(order, beta).unwrap();
    let mut acc = Matrix2::zero();
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        for x in [-1.0 + t, 1.0 - t] {
            let smooth = (2.0 - t).pow_half(pr.n as i32 - 2);
            let qs = q_eval_sequence(pr, i.max(j), x);
            let v = qs[i]
                .mul(weight_core(pr, x))
                .mul(qs[j].transpose())
                .scale(w * smooth);
            acc = acc.add(v);
        }
    }
    acc
}

#[test]
fn criterion_9_structural_suite() {
    // Orthonormality of Q_w at 1e-10.
    let mut worst_ortho = 0.0f64;
    for &(n, p) in &[(8u32, 3.0f64), (3, 1.3)] {
        let pr = params(n, p, 10, 0.9);
        for i in 0..=10usize {
            for j in i..=10 {
                let g = gram(&pr, i, j, 72);
                let want = if i == j {
                    Matrix2::identity()
                } else {
                    Matrix2::zero()
                };
                worst_ortho = worst_ortho.max(g.sub(want).max_abs());
            }
        }
    }
    println!(
        "criterion 9 {}: orthonormality defect {worst_ortho:.3e} (tol 1e-10)",
        if worst_ortho <= 1e-10 { "PASS" } else { "FAIL" }
    );
    assert!(worst_ortho <= 1e-10);

    // Monotonicity in alpha: increments are PSD.
    let mut worst_psd = 0.0f64;
    for &(n, p, level) in &[(8u32, 3.0f64, 2usize), (4, 1.3, 3)] {
        let alphas = [-0.5, 0.3, 0.9];
        for w in alphas.windows(2) {
            let m1 = m_quad(n, p, level, w[0]);
            let m2 = m_quad(n, p, level, w[1]);
            let (vals, _) = jacobi_eigen(&m2.as_mat().sub(m1.as_mat())).unwrap();
            for v in vals {
                worst_psd = worst_psd.min(v);
            }
        }
    }
    println!(
        "criterion 9 {}: monotonicity in alpha, smallest increment eigenvalue {worst_psd:.3e} (floor -1e-12)",
        if worst_psd >= -1e-12 { "PASS" } else { "FAIL" }
    );
    assert!(worst_psd >= -1e-12);

    // Duality: J-conjugation of M(p) equals M(n-p).
    let mut worst_dual = 0.0f64;
    for &(n, p, level, alpha) in &[(8u32, 3.0f64, 2usize, 0.5f64), (27, 15.0, 2, 0.9), (5, 1.9, 3, -0.4)]
    {
        let m = m_quad(n, p, level, alpha);
        let dual = build_m_quadrature(&params(n, n as f64 - p, level, alpha))
            .unwrap()
            .matrix;
        worst_dual = worst_dual.max(duality_map(&m).sub_max_abs(&dual));
    }
    println!(
        "criterion 9 {}: duality defect {worst_dual:.3e} (tol 1e-12)",
        if worst_dual <= 1e-12 { "PASS" } else { "FAIL" }
    );
    assert!(worst_dual <= 1e-12);

    // alpha = 1 is exactly the identity.
    let m1 = build_m_quadrature(&params(9, 2.5, 3, 1.0)).unwrap().matrix;
    let d = m1.as_mat().sub(&Mat::identity(8)).max_abs();
    println!(
        "criterion 9 {}: alpha = 1 identity defect {d:.3e} (tol 1e-12)",
        if d <= 1e-12 { "PASS" } else { "FAIL" }
    );
    assert!(d <= 1e-12);
}

#[test]
fn gap_contrast_at_benchmark_case() {
    // Replaces the non-reproducible overlap table: L1's spectrum is
    // well-separated (hard assertion), M's is clustered (expected
    // observation, printed but not asserted).
    let (n, p, level, alpha) = BENCH;
    let pr = params(n, p, level, alpha);
    let l1 = build_l1(&pr).unwrap();
    let sl = symmetric_eigen(&l1.to_dense()).unwrap();
    let rep = simplicity_check(&sl);
    println!(
        "gap contrast: L1 min gap {:.4e} (>= 0.05 required), simple = {}",
        rep.min_gap, rep.simple
    );
    assert!(rep.min_gap >= 0.05);

    let m = m_quad(n, p, level, alpha);
    let sm = symmetric_eigen(m.as_mat()).unwrap();
    let clustered = sm
        .eigenvalues
        .windows(2)
        .any(|w| (w[1] - w[0]).abs() < 1e-3);
    println!(
        "gap contrast: M min gap {:.4e}; at least two eigenvalues closer than 1e-3: {} (expected observation, not asserted)",
        sm.min_gap, clustered
    );
}
