//! Executable oracles for the structural results the instance families rely
//! on: the diagonal-system covariance lemma, the scalar-channel monotonicity
//! curve, the orthogonal-transform block decomposition behind the reduction's
//! "no" direction, and the greedy-failure ratio.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instances::{
    build_example1_instance, incidence_matrix, theorem3_limit_ratio, theorem3_sigmas, x3c_oracle,
    X3CInstance,
};
use crate::linalg;
use crate::riccati::{
    scalar_sigma11, solve_dare, Selection, SensorCatalog, SteadyState, SystemModel, PBH_CUTOFF,
};
use crate::selection::{exhaustive_select, greedy_select, ratio, RatioReport, SelectionResult};

/// Orthogonal change of basis that exposes the uncovered-element structure of
/// a partial cover: `[dᵀ; G_Lᵀ]·N = [γ β; 0 G̃ᵀ]` with canonical basis vectors
/// for uncovered elements leading the nullspace block.
#[derive(Debug, Clone)]
pub struct TransformReport {
    /// The orthogonal matrix `N = [N₁ N₂]`.
    pub transform: DMatrix<f64>,
    /// `dᵀN₁`, length 3m − r; contains a guaranteed 1 for every uncovered element.
    pub gamma: Vec<f64>,
    /// `dᵀN₂`, length r.
    pub beta: Vec<f64>,
    /// `G_Lᵀ N₂`, an l×r full-column-rank block.
    pub gtilde: DMatrix<f64>,
    /// Number of uncovered elements (zero columns of `G_Lᵀ`).
    pub omega: usize,
    /// Numerical rank of `G_L`.
    pub rank: usize,
}

/// Build the orthogonal transform of the block decomposition above.
///
/// `g_l` is the 3m×l incidence submatrix of a partial cover (binary columns
/// with exactly three ones), `d` the length-3m weight vector (all ones in the
/// reduction).
pub fn build_transform(g_l: &DMatrix<f64>, d: &DVector<f64>) -> Result<TransformReport> {
    let rows = g_l.nrows();
    let l = g_l.ncols();
    if rows == 0 || !rows.is_multiple_of(3) {
        return Err(Error::HypothesisViolation(format!(
            "G_L must have 3m rows, got {rows}"
        )));
    }
    let m = rows / 3;
    if l > m {
        return Err(Error::HypothesisViolation(format!(
            "G_L has {l} columns, more than m = {m}"
        )));
    }
    if d.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "d has length {}, expected {rows}",
            d.len()
        )));
    }
    for c in 0..l {
        let col = g_l.column(c);
        if col.iter().any(|&x| x != 0.0 && x != 1.0) {
            return Err(Error::HypothesisViolation(format!(
                "column {} of G_L is not binary",
                c + 1
            )));
        }
        if col.sum() != 3.0 {
            return Err(Error::HypothesisViolation(format!(
                "column {} of G_L does not have exactly three ones",
                c + 1
            )));
        }
    }

    // Rank of G_L with an ambiguity guard on the singular-value gap.
    let svs = linalg::singular_values(g_l);
    let smax = svs.first().copied().unwrap_or(0.0);
    let cutoff = PBH_CUTOFF * smax;
    let rank = svs.iter().filter(|&&s| s > cutoff).count();
    if rank < svs.len() && rank > 0 {
        let gap = svs[rank - 1] - svs[rank];
        if gap < 1e-12 {
            return Err(Error::RankDeficiency(format!(
                "singular values {} and {} straddle the cutoff with gap {gap:e}",
                svs[rank - 1],
                svs[rank]
            )));
        }
    }

    // Column-space basis of G_L (row space of G_Lᵀ).
    let n2 = if rank > 0 {
        let svd = g_l.clone().svd(true, false);
        let u = svd.u.expect("requested U");
        u.columns(0, rank).into_owned()
    } else {
        DMatrix::zeros(rows, 0)
    };

    // Nullspace basis of G_Lᵀ: canonical vectors of uncovered elements first,
    // then canonical candidates orthonormalized against everything collected.
    let uncovered: Vec<usize> = (0..rows)
        .filter(|&j| g_l.row(j).iter().all(|&x| x == 0.0))
        .collect();
    let omega = uncovered.len();
    let null_dim = rows - rank;
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(null_dim);
    for &j in &uncovered {
        let mut e = DVector::zeros(rows);
        e[j] = 1.0;
        basis.push(e);
    }
    for k in 0..rows {
        if basis.len() == null_dim {
            break;
        }
        if uncovered.contains(&k) {
            continue;
        }
        let mut v = DVector::zeros(rows);
        v[k] = 1.0;
        // Two projection passes keep the basis orthogonal to working precision.
        for _ in 0..2 {
            let coeffs = n2.transpose() * &v;
            v -= &n2 * coeffs;
            for b in &basis {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    if basis.len() != null_dim {
        return Err(Error::RankDeficiency(format!(
            "assembled {} nullspace directions, expected {null_dim}",
            basis.len()
        )));
    }

    let mut transform = DMatrix::zeros(rows, rows);
    for (i, b) in basis.iter().enumerate() {
        transform.column_mut(i).copy_from(b);
    }
    transform
        .view_mut((0, null_dim), (rows, rank))
        .copy_from(&n2);

    let gamma: Vec<f64> = basis.iter().map(|b| d.dot(b)).collect();
    let beta: Vec<f64> = (0..rank).map(|c| d.dot(&n2.column(c).into_owned())).collect();
    let gtilde = g_l.transpose() * &n2;

    Ok(TransformReport {
        transform,
        gamma,
        beta,
        gtilde,
        omega,
        rank,
    })
}

/// Which sub-case of the diagonal-system covariance lemma a check exercised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma1Case {
    /// (a) `W_ii ≤ Σ_ii`.
    LowerBound,
    /// (a) `Σ_ii ≤ W_ii/(1−λᵢ²)`.
    UpperBound,
    /// (b) `W_ii = 0` forces `Σ_ii = 0`.
    ZeroProcessNoise,
    /// (c) `λᵢ = 0` forces `Σ_ii = W_ii`.
    ZeroEigenvalue,
    /// (d) a zero column of `C(μ)` forces `Σ_ii = W_ii/(1−λᵢ²)`.
    UnobservedState,
    /// (e) `eᵢ ∈ rowspace(C(μ))` forces `Σ_ii = W_ii`.
    CanonicalReadout,
}

impl std::fmt::Display for Lemma1Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Lemma1Case::LowerBound => "lower-bound",
            Lemma1Case::UpperBound => "upper-bound",
            Lemma1Case::ZeroProcessNoise => "zero-process-noise",
            Lemma1Case::ZeroEigenvalue => "zero-eigenvalue",
            Lemma1Case::UnobservedState => "unobserved-state",
            Lemma1Case::CanonicalReadout => "canonical-readout",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Lemma1Check {
    pub case: Lemma1Case,
    /// 0-based state index.
    pub state: usize,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct Lemma1Report {
    pub checks: Vec<Lemma1Check>,
    pub sigma: DMatrix<f64>,
}

impl Lemma1Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Lemma1Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Per-case pass threshold of [`check_lemma1`].
pub const LEMMA1_TOL: f64 = 1e-9;

/// Solve the steady-state covariance of a diagonal system with exact
/// measurements and assert every applicable sub-case of the covariance lemma.
///
/// Hypotheses: `A` diagonal with |λᵢ| < 1, `W` diagonal, `V = 0`.
pub fn check_lemma1(
    sys: &SystemModel,
    catalog: &SensorCatalog,
    sel: &Selection,
) -> Result<Lemma1Report> {
    let n = sys.n();
    let a = sys.a();
    let w = sys.w();
    for i in 0..n {
        for j in 0..n {
            if i != j && (a[(i, j)] != 0.0 || w[(i, j)] != 0.0) {
                return Err(Error::HypothesisViolation(
                    "A and W must be diagonal".into(),
                ));
            }
        }
        if a[(i, i)].abs() >= 1.0 {
            return Err(Error::HypothesisViolation(format!(
                "|lambda_{}| = {} is not < 1",
                i + 1,
                a[(i, i)].abs()
            )));
        }
    }
    if catalog.v().iter().any(|&x| x != 0.0) {
        return Err(Error::HypothesisViolation("V must be zero".into()));
    }
    let steady = solve_dare(sys, catalog, sel)?;
    let sigma = match steady {
        SteadyState::Finite { sigma, .. } => sigma,
        SteadyState::Unbounded => {
            return Err(Error::VerificationFailed(
                "stable diagonal system reported an unbounded covariance".into(),
            ))
        }
    };
    let (cmu, _) = crate::riccati::select_rows(catalog, sel)?;

    let mut checks = Vec::new();
    for i in 0..n {
        let lam = a[(i, i)];
        let wi = w[(i, i)];
        let sii = sigma[(i, i)];
        let upper = wi / (1.0 - lam * lam);
        let low_res = (wi - sii).max(0.0);
        checks.push(Lemma1Check {
            case: Lemma1Case::LowerBound,
            state: i,
            residual: low_res,
            pass: low_res <= LEMMA1_TOL,
        });
        let up_res = (sii - upper).max(0.0);
        checks.push(Lemma1Check {
            case: Lemma1Case::UpperBound,
            state: i,
            residual: up_res,
            pass: up_res <= LEMMA1_TOL,
        });
        if wi == 0.0 {
            let r = sii.abs();
            checks.push(Lemma1Check {
                case: Lemma1Case::ZeroProcessNoise,
                state: i,
                residual: r,
                pass: r <= LEMMA1_TOL,
            });
        }
        if lam == 0.0 {
            let r = (sii - wi).abs();
            checks.push(Lemma1Check {
                case: Lemma1Case::ZeroEigenvalue,
                state: i,
                residual: r,
                pass: r <= LEMMA1_TOL,
            });
        }
        let column_zero = cmu.nrows() == 0 || cmu.column(i).iter().all(|&x| x == 0.0);
        if wi != 0.0 && column_zero {
            let r = (sii - upper).abs();
            checks.push(Lemma1Check {
                case: Lemma1Case::UnobservedState,
                state: i,
                residual: r,
                pass: r <= LEMMA1_TOL,
            });
        }
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        if cmu.nrows() > 0 && linalg::row_in_rowspace(&cmu, &e, PBH_CUTOFF) {
            let r = (sii - wi).abs();
            checks.push(Lemma1Check {
                case: Lemma1Case::CanonicalReadout,
                state: i,
                residual: r,
                pass: r <= LEMMA1_TOL,
            });
        }
    }
    Ok(Lemma1Report { checks, sigma })
}

/// Appendix rewrite of the scalar channel variance, valid for α² > 0; agrees
/// with [`scalar_sigma11`] to working precision and is kept as a second
/// algebraic route.
pub fn scalar_sigma11_rewrite(lambda1: f64, alpha_sq: f64) -> Result<f64> {
    if alpha_sq <= 0.0 || alpha_sq.is_nan() {
        return Err(Error::DomainError(
            "the rewritten form requires alpha squared > 0".into(),
        ));
    }
    if !(lambda1.abs() > 0.0 && lambda1.abs() < 1.0) {
        return Err(Error::DomainError(format!(
            "lambda1 must satisfy 0 < |lambda1| < 1, got {lambda1}"
        )));
    }
    let c = 1.0 - lambda1 * lambda1;
    let inv = 1.0 / alpha_sq;
    Ok(2.0 / (((c - inv).powi(2) + 4.0 * inv).sqrt() + c - inv))
}

/// Evaluate the scalar channel across a grid of α² values, asserting strict
/// monotonicity and the endpoint limits (1 at α² = 0, 1/(1−λ₁²) as α² → ∞).
pub fn lemma2_curve(lambda1: f64, alpha_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    for pair in alpha_grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::DomainError(
                "alpha grid must be strictly increasing".into(),
            ));
        }
    }
    if alpha_grid.first().is_some_and(|&a| a < 0.0) {
        return Err(Error::DomainError("alpha grid must be nonnegative".into()));
    }
    let mut curve = Vec::with_capacity(alpha_grid.len());
    for &a in alpha_grid {
        curve.push((a, scalar_sigma11(lambda1, a)?));
    }
    for pair in curve.windows(2) {
        if pair[1].1 <= pair[0].1 {
            return Err(Error::VerificationFailed(format!(
                "channel variance is not strictly increasing between alpha^2 = {} and {}",
                pair[0].0, pair[1].0
            )));
        }
    }
    if let Some(&(a0, v0)) = curve.first() {
        if a0 == 0.0 && (v0 - 1.0).abs() > 1e-12 {
            return Err(Error::VerificationFailed(format!(
                "value at alpha^2 = 0 is {v0}, expected 1"
            )));
        }
    }
    if let Some(&(alast, vlast)) = curve.last() {
        let limit = 1.0 / (1.0 - lambda1 * lambda1);
        if alast >= 1e10 && (vlast - limit).abs() > 1e-6 {
            return Err(Error::VerificationFailed(format!(
                "value at alpha^2 = {alast} is {vlast}, expected the limit {limit}"
            )));
        }
    }
    Ok(curve)
}

/// Greedy-vs-optimal run on the greedy-failure family, with the analytic
/// finite-h predictions alongside the measured values.
#[derive(Debug, Clone)]
pub struct Theorem3Report {
    pub greedy: SelectionResult,
    pub optimal: SelectionResult,
    pub ratio: RatioReport,
    /// Analytic greedy trace σ₂₃ + 2.
    pub predicted_greedy_trace: f64,
    /// Analytic ratio (σ₂₃ + 2)/3.
    pub predicted_ratio: f64,
    /// The h → ∞ limit 2/3 + 1/(3(1−λ₁²)).
    pub limit_ratio: f64,
}

/// Run greedy (2 picks) and exhaustive (budget 2) on the greedy-failure family
/// and report measured and predicted ratios.
pub fn theorem3_ratio(lambda1: f64, h: f64) -> Result<Theorem3Report> {
    let inst = build_example1_instance(lambda1, h)?;
    let greedy = greedy_select(&inst.sys, &inst.catalog, 2)?;
    let optimal = exhaustive_select(&inst.sys, &inst.catalog, inst.budget)?;
    let rr = ratio(&greedy, &optimal);
    let sig = theorem3_sigmas(lambda1, h)?;
    Ok(Theorem3Report {
        greedy,
        optimal,
        ratio: rr,
        predicted_greedy_trace: sig.sigma23 + 2.0,
        predicted_ratio: (sig.sigma23 + 2.0) / 3.0,
        limit_ratio: theorem3_limit_ratio(lambda1),
    })
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

/// Outcome of one verification sweep, with a description per failed check.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Draw a random diagonal instance satisfying the lemma hypotheses: |λᵢ| ≤
/// 0.95, W_ii ∈ [0, 2] (exactly zero with positive probability), binary
/// measurement rows, V = 0.
pub fn random_lemma1_instance(
    rng: &mut impl Rng,
) -> Result<(SystemModel, SensorCatalog, Selection)> {
    let n = rng.random_range(1..=6);
    let mut a = DMatrix::zeros(n, n);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = if rng.random_bool(0.2) {
            0.0
        } else {
            rng.random_range(-0.95..0.95)
        };
        w[(i, i)] = if rng.random_bool(0.2) {
            0.0
        } else {
            rng.random_range(0.0..2.0)
        };
    }
    let q = rng.random_range(1..=4);
    let mut rows = Vec::with_capacity(q);
    for _ in 0..q {
        let mut row = DMatrix::zeros(1, n);
        for j in 0..n {
            if rng.random_bool(0.4) {
                row[(0, j)] = 1.0;
            }
        }
        rows.push(row);
    }
    let sys = SystemModel::new(a, w)?;
    let catalog = SensorCatalog::new(n, rows, DMatrix::zeros(q, q), vec![1.0; q])?;
    let mu: Vec<bool> = (0..q).map(|_| rng.random_bool(0.5)).collect();
    let budget = mu.iter().filter(|&&b| b).count() as f64;
    let sel = Selection::new(mu, budget)?;
    Ok((sys, catalog, sel))
}

/// Run [`check_lemma1`] over `count` seeded random instances.
pub fn lemma1_random_suite(seed: u64, count: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for case in 0..count {
        match random_lemma1_instance(&mut rng)
            .and_then(|(sys, cat, sel)| check_lemma1(&sys, &cat, &sel))
        {
            Ok(report) => {
                for f in report.failures() {
                    failures.push(format!(
                        "case {case}: {} at state {} residual {:e}",
                        f.case,
                        f.state + 1,
                        f.residual
                    ));
                }
            }
            Err(e) => failures.push(format!("case {case}: {e}")),
        }
    }
    SuiteReport {
        name: "lemma1-random",
        cases: count,
        failures,
    }
}

/// Fixed pool of cover collections whose exact-cover answer is "no",
/// spanning m = 2 and m = 3.
pub fn x3c_no_pool() -> Vec<X3CInstance> {
    let mk = |m: usize, subsets: &[[usize; 3]]| {
        X3CInstance::new(m, subsets.to_vec()).expect("pool entries are valid")
    };
    vec![
        mk(2, &[[1, 2, 3]]),
        mk(2, &[[1, 2, 3], [2, 3, 4]]),
        mk(2, &[[1, 2, 3], [1, 2, 4], [3, 4, 5]]),
        mk(2, &[[1, 2, 3], [1, 4, 5], [1, 4, 6], [2, 3, 4]]),
        mk(2, &[[1, 2, 3], [1, 2, 4], [1, 2, 5], [1, 2, 6], [1, 3, 4]]),
        mk(3, &[[1, 2, 3], [4, 5, 6], [1, 8, 9]]),
        mk(3, &[[1, 2, 3], [3, 4, 5], [5, 6, 7], [7, 8, 9]]),
        mk(3, &[[1, 2, 3], [4, 5, 6], [4, 5, 7], [4, 5, 8], [4, 5, 9]]),
        mk(3, &[[1, 2, 3], [1, 4, 5], [1, 6, 7], [1, 8, 9], [2, 4, 6]]),
    ]
}

/// Check the four transform invariants on every `(G_L, d)` drawn from the
/// "no" pool, over every index set L with |L| ≤ m.
pub fn transform_suite() -> SuiteReport {
    let pool = x3c_no_pool();
    let mut failures = Vec::new();
    let mut cases = 0usize;
    for (pi, x3c) in pool.iter().enumerate() {
        match x3c_oracle(x3c) {
            Ok(None) => {}
            Ok(Some(w)) => {
                failures.push(format!("pool {pi}: unexpectedly has a cover {w:?}"));
                continue;
            }
            Err(e) => {
                failures.push(format!("pool {pi}: oracle failed: {e}"));
                continue;
            }
        }
        let g = incidence_matrix(x3c);
        let d = DVector::from_element(x3c.ground_size(), 1.0);
        let tau = x3c.tau();
        for mask in 0u32..(1 << tau) {
            let l: Vec<usize> = (0..tau).filter(|&i| mask & (1 << i) != 0).collect();
            if l.len() > x3c.m() {
                continue;
            }
            cases += 1;
            let g_l = g.select_columns(&l);
            let report = match build_transform(&g_l, &d) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("pool {pi} L={l:?}: {e}"));
                    continue;
                }
            };
            let id_gap = linalg::max_abs_diff(
                &(report.transform.transpose() * &report.transform),
                &DMatrix::identity(g.nrows(), g.nrows()),
            );
            if id_gap > 1e-10 {
                failures.push(format!("pool {pi} L={l:?}: N not orthogonal ({id_gap:e})"));
            }
            // Block identity [dᵀ; G_Lᵀ]·N = [γ β; 0 G̃ᵀ].
            let mut lhs = DMatrix::zeros(1 + l.len(), g.nrows());
            lhs.row_mut(0).copy_from(&d.transpose());
            lhs.view_mut((1, 0), (l.len(), g.nrows()))
                .copy_from(&g_l.transpose());
            let mapped = &lhs * &report.transform;
            let null_dim = g.nrows() - report.rank;
            let mut expected = DMatrix::zeros(1 + l.len(), g.nrows());
            for (j, &v) in report.gamma.iter().enumerate() {
                expected[(0, j)] = v;
            }
            for (j, &v) in report.beta.iter().enumerate() {
                expected[(0, null_dim + j)] = v;
            }
            expected
                .view_mut((1, null_dim), (l.len(), report.rank))
                .copy_from(&report.gtilde);
            let block_gap = linalg::max_abs_diff(&mapped, &expected);
            if block_gap > 1e-10 {
                failures.push(format!(
                    "pool {pi} L={l:?}: block identity off by {block_gap:e}"
                ));
            }
            let ones = report
                .gamma
                .iter()
                .filter(|&&x| (x - 1.0).abs() <= 1e-10)
                .count();
            if ones < report.omega || report.omega < 1 {
                failures.push(format!(
                    "pool {pi} L={l:?}: gamma holds {ones} unit entries, omega = {}",
                    report.omega
                ));
            }
            if report.rank > 0 {
                let svs = linalg::singular_values(&report.gtilde);
                if svs[svs.len() - 1] <= 1e-10 * svs[0] {
                    failures.push(format!(
                        "pool {pi} L={l:?}: Gtilde is column-rank deficient"
                    ));
                }
            }
        }
    }
    SuiteReport {
        name: "transform-no-instances",
        cases,
        failures,
    }
}

/// Measured-vs-analytic sweep of the greedy-failure family, including the
/// large-ratio divergence witnesses.
pub fn theorem3_suite() -> SuiteReport {
    let mut failures = Vec::new();
    let mut cases = 0usize;
    for &lambda1 in &[0.3, 0.5, 0.7, 0.9] {
        for &h in &[1.0, 10.0, 100.0, 1000.0] {
            cases += 1;
            match theorem3_ratio(lambda1, h) {
                Ok(rep) => {
                    let gap = (rep.ratio.trace_alg - rep.predicted_greedy_trace).abs();
                    if gap > 1e-8 {
                        failures.push(format!(
                            "lambda1={lambda1} h={h}: greedy trace off the analytic value by {gap:e}"
                        ));
                    }
                    if (rep.ratio.trace_opt - 3.0).abs() > 1e-8 {
                        failures.push(format!(
                            "lambda1={lambda1} h={h}: optimal trace {} is not 3",
                            rep.ratio.trace_opt
                        ));
                    }
                    if rep.ratio.ratio < 1.0 - 1e-9 {
                        failures.push(format!(
                            "lambda1={lambda1} h={h}: ratio {} below 1",
                            rep.ratio.ratio
                        ));
                    }
                }
                Err(e) => failures.push(format!("lambda1={lambda1} h={h}: {e}")),
            }
        }
    }
    for (lambda1, h, threshold) in [(0.99, 1e4, 5.0), (0.999, 1e5, 30.0)] {
        cases += 1;
        match theorem3_ratio(lambda1, h) {
            Ok(rep) => {
                if rep.limit_ratio <= threshold {
                    failures.push(format!(
                        "lambda1={lambda1}: limit ratio {} does not exceed {threshold}",
                        rep.limit_ratio
                    ));
                }
                if rep.ratio.ratio <= threshold {
                    failures.push(format!(
                        "lambda1={lambda1} h={h}: measured ratio {} does not exceed {threshold}",
                        rep.ratio.ratio
                    ));
                }
            }
            Err(e) => failures.push(format!("lambda1={lambda1} h={h}: {e}")),
        }
    }
    SuiteReport {
        name: "greedy-failure-ratio",
        cases,
        failures,
    }
}

/// Monotonicity, endpoints, and two-route agreement of the scalar channel.
pub fn lemma2_suite() -> SuiteReport {
    let mut failures = Vec::new();
    let mut cases = 0usize;
    let grid = [0.0, 0.5, 1.0, 4.0, 100.0, 1e6, 1e10];
    for &lambda1 in &[0.2, 0.5, 0.8, 0.95] {
        cases += 1;
        match lemma2_curve(lambda1, &grid) {
            Ok(curve) => {
                for &(a, value) in curve.iter().filter(|&&(a, _)| a > 0.0) {
                    let rewrite = scalar_sigma11_rewrite(lambda1, a)
                        .expect("grid point is positive");
                    if (value - rewrite).abs() > 1e-12 {
                        failures.push(format!(
                            "lambda1={lambda1} alpha^2={a}: the two closed forms disagree"
                        ));
                    }
                }
            }
            Err(e) => failures.push(format!("lambda1={lambda1}: {e}")),
        }
    }
    SuiteReport {
        name: "scalar-channel-curve",
        cases,
        failures,
    }
}
