//! Steady-state a-priori error covariance of the Kalman filter.
//!
//! The solver iterates the discrete algebraic Riccati equation
//!
//! ```text
//! Σ = AΣAᵀ + W − AΣCᵀ(CΣCᵀ + V)⁺CΣAᵀ
//! ```
//!
//! from Σ₀ = W, with a Moore–Penrose pseudo-inverse in the innovation term so
//! that singular (including zero) measurement-noise covariances are handled.
//! Undetectable `(A, C(μ))` pairs produce an explicit [`SteadyState::Unbounded`]
//! instead of a diverging iteration.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

/// Elementwise convergence threshold for the fixed-point iteration.
pub const CONVERGENCE_TOL: f64 = 1e-11;
/// Iteration cap; hitting it signals an ill-conditioned instance.
pub const MAX_ITERATIONS: usize = 1_000_000;
/// Accepted residual of the converged covariance, relative to 1 + max|Σ|.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Relative singular-value cutoff of the pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-12;
/// Relative singular-value cutoff of PBH rank tests.
pub const PBH_CUTOFF: f64 = 1e-10;
/// Eigenvalues with |λ| ≥ 1 − DETECTABILITY_EDGE take part in the PBH
/// detectability test.
pub const DETECTABILITY_EDGE: f64 = 1e-9;

/// Plant dynamics: `x[k+1] = A x[k] + w[k]` with process noise covariance `W`.
///
/// Construction validates that `W` is symmetric PSD and that `(A, W^{1/2})` is
/// stabilizable (PBH test on every eigenvalue of `A` with |λ| ≥ 1).
#[derive(Debug, Clone)]
pub struct SystemModel {
    n: usize,
    a: DMatrix<f64>,
    w: DMatrix<f64>,
}

impl SystemModel {
    pub fn new(a: DMatrix<f64>, w: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || !a.is_square() {
            return Err(Error::InvalidModel(format!(
                "A must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if w.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "W must be {n}x{n}, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        let asym = linalg::max_abs_diff(&w, &w.transpose());
        if asym > 1e-12 * linalg::max_abs(&w) {
            return Err(Error::InvalidModel(format!(
                "W is not symmetric: max|W - Wt| = {asym:e}"
            )));
        }
        let mut w = w;
        linalg::symmetrize(&mut w);
        let min_eig = w
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |acc, &l| acc.min(l));
        if min_eig < -1e-10 {
            return Err(Error::InvalidModel(format!(
                "W is not positive semidefinite: min eigenvalue {min_eig:e}"
            )));
        }
        let w_sqrt = linalg::sym_psd_sqrt(&w);
        for lambda in linalg::eigenvalues(&a) {
            if lambda.norm() >= 1.0
                && linalg::pbh_wide_rank(&a, &w_sqrt, lambda, PBH_CUTOFF) < n
            {
                return Err(Error::InvalidModel(format!(
                    "(A, W^(1/2)) is not stabilizable: PBH rank deficient at lambda = {lambda}"
                )));
            }
        }
        Ok(Self { n, a, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }
}

/// The pool of candidate sensors: per-sensor measurement rows `Cᵢ`, the joint
/// measurement-noise covariance `V` of all sensors, and installation costs.
#[derive(Debug, Clone)]
pub struct SensorCatalog {
    n: usize,
    rows: Vec<DMatrix<f64>>,
    /// Row offset of each sensor's block inside the stacked measurement matrix.
    offsets: Vec<usize>,
    v: DMatrix<f64>,
    costs: Vec<f64>,
}

impl SensorCatalog {
    pub fn new(
        n: usize,
        rows: Vec<DMatrix<f64>>,
        v: DMatrix<f64>,
        costs: Vec<f64>,
    ) -> Result<Self> {
        let q = rows.len();
        let mut offsets = Vec::with_capacity(q);
        let mut total = 0usize;
        for (i, block) in rows.iter().enumerate() {
            if block.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "sensor {} has {} columns, expected {n}",
                    i + 1,
                    block.ncols()
                )));
            }
            if block.nrows() == 0 {
                return Err(Error::DimensionMismatch(format!(
                    "sensor {} has no measurement rows",
                    i + 1
                )));
            }
            offsets.push(total);
            total += block.nrows();
        }
        if v.shape() != (total, total) {
            return Err(Error::DimensionMismatch(format!(
                "V must be {total}x{total} (total measurement rows), got {}x{}",
                v.nrows(),
                v.ncols()
            )));
        }
        let asym = linalg::max_abs_diff(&v, &v.transpose());
        if asym > 1e-12 * linalg::max_abs(&v) {
            return Err(Error::InvalidModel(format!(
                "V is not symmetric: max|V - Vt| = {asym:e}"
            )));
        }
        if total > 0 {
            let min_eig = v
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |acc, &l| acc.min(l));
            if min_eig < -1e-10 {
                return Err(Error::InvalidModel(format!(
                    "V is not positive semidefinite: min eigenvalue {min_eig:e}"
                )));
            }
        }
        if costs.len() != q {
            return Err(Error::DimensionMismatch(format!(
                "cost vector has length {}, expected {q}",
                costs.len()
            )));
        }
        if let Some(c) = costs.iter().find(|&&c| c < 0.0 || !c.is_finite()) {
            return Err(Error::InvalidModel(format!("negative or non-finite sensor cost {c}")));
        }
        Ok(Self {
            n,
            rows,
            offsets,
            v,
            costs,
        })
    }

    pub fn q(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of measurement rows over all sensors.
    pub fn total_rows(&self) -> usize {
        self.offsets.last().map_or(0, |&o| o) + self.rows.last().map_or(0, |r| r.nrows())
    }

    pub fn rows(&self) -> &[DMatrix<f64>] {
        &self.rows
    }

    pub fn sensor(&self, i: usize) -> &DMatrix<f64> {
        &self.rows[i]
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }
}

/// Binary sensor indicator vector together with its budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    mu: Vec<bool>,
    budget: f64,
}

impl Selection {
    pub fn new(mu: Vec<bool>, budget: f64) -> Result<Self> {
        if budget < 0.0 || !budget.is_finite() {
            return Err(Error::DomainError(format!(
                "budget must be nonnegative and finite, got {budget}"
            )));
        }
        Ok(Self { mu, budget })
    }

    pub fn empty(q: usize, budget: f64) -> Result<Self> {
        Self::new(vec![false; q], budget)
    }

    /// Selection from 0-based sensor indices.
    pub fn from_indices(q: usize, indices: &[usize], budget: f64) -> Result<Self> {
        let mut mu = vec![false; q];
        for &i in indices {
            if i >= q {
                return Err(Error::DomainError(format!(
                    "sensor index {i} out of range for catalog of size {q}"
                )));
            }
            mu[i] = true;
        }
        Self::new(mu, budget)
    }

    /// Selection from a mask string such as `"101"`; the first character is
    /// sensor 1.
    pub fn from_mask_str(mask: &str, budget: f64) -> Result<Self> {
        let mut mu = Vec::with_capacity(mask.len());
        for ch in mask.chars() {
            match ch {
                '0' => mu.push(false),
                '1' => mu.push(true),
                _ => {
                    return Err(Error::Parse(format!(
                        "mask must contain only 0 and 1, found {ch:?}"
                    )))
                }
            }
        }
        Self::new(mu, budget)
    }

    pub fn mu(&self) -> &[bool] {
        &self.mu
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.mu.iter().any(|&b| b)
    }

    /// 0-based indices of the selected sensors, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.mu
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn cost(&self, catalog: &SensorCatalog) -> f64 {
        self.support().iter().map(|&i| catalog.costs()[i]).sum()
    }

    /// Whether the selection satisfies its own budget bᵀμ ≤ B.
    pub fn is_feasible(&self, catalog: &SensorCatalog) -> bool {
        self.cost(catalog) <= self.budget
    }

    pub fn mask_string(&self) -> String {
        self.mu.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Converged steady-state covariance, or the +∞ marker for undetectable pairs.
#[derive(Debug, Clone)]
pub enum SteadyState {
    Finite {
        sigma: DMatrix<f64>,
        trace: f64,
        iterations: usize,
    },
    Unbounded,
}

impl SteadyState {
    pub fn is_finite(&self) -> bool {
        matches!(self, SteadyState::Finite { .. })
    }

    /// Trace as an extended real: `+∞` for unbounded steady states, so that an
    /// unbounded selection compares strictly worse than any finite one.
    pub fn trace_extended(&self) -> f64 {
        match self {
            SteadyState::Finite { trace, .. } => *trace,
            SteadyState::Unbounded => f64::INFINITY,
        }
    }

    pub fn sigma(&self) -> Option<&DMatrix<f64>> {
        match self {
            SteadyState::Finite { sigma, .. } => Some(sigma),
            SteadyState::Unbounded => None,
        }
    }

    pub fn iterations(&self) -> Option<usize> {
        match self {
            SteadyState::Finite { iterations, .. } => Some(*iterations),
            SteadyState::Unbounded => None,
        }
    }
}

/// One step of the covariance fixed-point iteration.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub sigma: DMatrix<f64>,
    pub k: usize,
}

impl IterationState {
    fn start(sigma0: DMatrix<f64>) -> Self {
        Self { sigma: sigma0, k: 0 }
    }

    /// Install the next (already symmetrized) iterate and report the largest
    /// elementwise change.
    fn advance(&mut self, next: DMatrix<f64>) -> f64 {
        let delta = linalg::max_abs_diff(&next, &self.sigma);
        self.sigma = next;
        self.k += 1;
        delta
    }
}

/// Stack the selected measurement rows `C(μ)` and extract the matching
/// principal submatrix `V(μ)`. An empty selection yields 0×n and 0×0 matrices.
pub fn select_rows(
    catalog: &SensorCatalog,
    sel: &Selection,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if sel.len() != catalog.q() {
        return Err(Error::DimensionMismatch(format!(
            "selection has {} entries but the catalog holds {} sensors",
            sel.len(),
            catalog.q()
        )));
    }
    let picked = sel.support();
    let total: usize = picked.iter().map(|&i| catalog.rows[i].nrows()).sum();
    let mut cmu = DMatrix::zeros(total, catalog.n());
    let mut vmu = DMatrix::zeros(total, total);
    // Absolute row ranges of the selected blocks inside the full stacked C.
    let mut spans = Vec::with_capacity(picked.len());
    let mut at = 0usize;
    for &i in &picked {
        let block = &catalog.rows[i];
        cmu.view_mut((at, 0), (block.nrows(), block.ncols()))
            .copy_from(block);
        spans.push((at, catalog.offsets[i], block.nrows()));
        at += block.nrows();
    }
    for &(dst_r, src_r, h_r) in &spans {
        for &(dst_c, src_c, h_c) in &spans {
            vmu.view_mut((dst_r, dst_c), (h_r, h_c))
                .copy_from(&catalog.v.view((src_r, src_c), (h_r, h_c)));
        }
    }
    Ok((cmu, vmu))
}

/// PBH detectability of `(A, C)`: every eigenvalue of `A` with
/// |λ| ≥ 1 − [`DETECTABILITY_EDGE`] must keep `[A − λI; C]` at full column rank.
pub fn is_detectable(a: &DMatrix<f64>, cmu: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    debug_assert_eq!(cmu.ncols(), n);
    linalg::eigenvalues(a).into_iter().all(|lambda| {
        lambda.norm() < 1.0 - DETECTABILITY_EDGE
            || linalg::pbh_stack_rank(a, cmu, lambda, PBH_CUTOFF) == n
    })
}

/// Right-hand side of the covariance Riccati equation with pseudo-inverted
/// innovation covariance.
fn riccati_rhs(
    a: &DMatrix<f64>,
    w: &DMatrix<f64>,
    c: &DMatrix<f64>,
    v: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
) -> DMatrix<f64> {
    let asig = a * sigma;
    let mut next = &asig * a.transpose() + w;
    if c.nrows() > 0 {
        let csig = c * sigma;
        let innov = &csig * c.transpose() + v;
        let innov_pinv = linalg::pseudo_inverse(&innov, PINV_CUTOFF);
        let gain = &asig * c.transpose();
        next -= &gain * innov_pinv * gain.transpose();
    }
    next
}

fn check_dims(sys: &SystemModel, catalog: &SensorCatalog) -> Result<()> {
    if catalog.n() != sys.n() {
        return Err(Error::DimensionMismatch(format!(
            "catalog is built for {} states but the system has {}",
            catalog.n(),
            sys.n()
        )));
    }
    Ok(())
}

/// With exact measurements (`V(μ) = 0`) the filter depends on `C(μ)` only
/// through its row space, so the rows may be replaced by an orthonormal basis.
/// This keeps the innovation matrix well conditioned when rows carry wildly
/// different scales.
///
/// The basis is computed on the nonzero columns only: zero columns of `C(μ)`
/// must stay exactly zero, or roundoff leaks a ghost observation of the
/// corresponding state, which under `V = 0` the update treats as perfect
/// information.
fn effective_measurement(cmu: DMatrix<f64>, vmu: DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    if cmu.nrows() == 0 || vmu.iter().any(|&x| x != 0.0) {
        return (cmu, vmu);
    }
    let n = cmu.ncols();
    let touched: Vec<usize> = (0..n)
        .filter(|&j| cmu.column(j).iter().any(|&x| x != 0.0))
        .collect();
    if touched.is_empty() {
        return (DMatrix::zeros(0, n), DMatrix::zeros(0, 0));
    }
    let restricted = cmu.select_columns(&touched);
    let svd = restricted.svd(false, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > PINV_CUTOFF * smax)
        .count();
    if rank == 0 {
        return (DMatrix::zeros(0, n), DMatrix::zeros(0, 0));
    }
    let v_t = svd.v_t.expect("requested V^T");
    let mut basis = DMatrix::zeros(rank, n);
    for r in 0..rank {
        for (sub_j, &j) in touched.iter().enumerate() {
            basis[(r, j)] = v_t[(r, sub_j)];
        }
    }
    (basis, DMatrix::zeros(rank, rank))
}

fn finish(
    sys: &SystemModel,
    c: &DMatrix<f64>,
    v: &DMatrix<f64>,
    state: IterationState,
) -> Result<SteadyState> {
    // Residual acceptance on the original Riccati form.
    let residual = linalg::max_abs_diff(
        &riccati_rhs(sys.a(), sys.w(), c, v, &state.sigma),
        &state.sigma,
    );
    if residual > RESIDUAL_TOL * (1.0 + linalg::max_abs(&state.sigma)) {
        return Err(Error::NonConvergence {
            max_iterations: state.k,
        });
    }
    let trace = state.sigma.trace();
    Ok(SteadyState::Finite {
        sigma: state.sigma,
        trace,
        iterations: state.k,
    })
}

/// Steady-state a-priori covariance `Σ(μ)` for the given selection.
///
/// Returns [`SteadyState::Unbounded`] when `(A, C(μ))` is not detectable.
pub fn solve_dare(
    sys: &SystemModel,
    catalog: &SensorCatalog,
    sel: &Selection,
) -> Result<SteadyState> {
    check_dims(sys, catalog)?;
    let (cmu, vmu) = select_rows(catalog, sel)?;
    if !is_detectable(sys.a(), &cmu) {
        return Ok(SteadyState::Unbounded);
    }
    let (cmu, vmu) = effective_measurement(cmu, vmu);
    let mut state = IterationState::start(sys.w().clone());
    loop {
        let mut next = riccati_rhs(sys.a(), sys.w(), &cmu, &vmu, &state.sigma);
        linalg::symmetrize(&mut next);
        let delta = state.advance(next);
        if delta < CONVERGENCE_TOL {
            return finish(sys, &cmu, &vmu, state);
        }
        if state.k >= MAX_ITERATIONS {
            return Err(Error::NonConvergence {
                max_iterations: MAX_ITERATIONS,
            });
        }
    }
}

/// Max-abs residual of the covariance Riccati equation at `sigma` for the
/// given selection, evaluated in the same numerically effective measurement
/// form the solver uses.
pub fn dare_residual(
    sys: &SystemModel,
    catalog: &SensorCatalog,
    sel: &Selection,
    sigma: &DMatrix<f64>,
) -> Result<f64> {
    check_dims(sys, catalog)?;
    let (cmu, vmu) = select_rows(catalog, sel)?;
    let (cmu, vmu) = effective_measurement(cmu, vmu);
    Ok(linalg::max_abs_diff(
        &riccati_rhs(sys.a(), sys.w(), &cmu, &vmu, sigma),
        sigma,
    ))
}

/// Information-form iteration `Σ ← W + A(Σ⁻¹ + R(μ))⁻¹Aᵀ` with
/// `R(μ) = C(μ)ᵀV(μ)⁻¹C(μ)`.
///
/// Valid only when `W` and `V(μ)` are invertible (the matrix-inversion-lemma
/// rewrite does not hold under pseudo-inverses); serves as an independent
/// cross-check of [`solve_dare`].
pub fn solve_dare_information_form(
    sys: &SystemModel,
    catalog: &SensorCatalog,
    sel: &Selection,
) -> Result<SteadyState> {
    check_dims(sys, catalog)?;
    let (cmu, vmu) = select_rows(catalog, sel)?;
    if !is_detectable(sys.a(), &cmu) {
        return Ok(SteadyState::Unbounded);
    }
    let n = sys.n();
    if sys.w().clone().cholesky().is_none() {
        return Err(Error::SingularNoise(
            "W must be invertible for the information form".into(),
        ));
    }
    let r_mu = if cmu.nrows() == 0 {
        DMatrix::zeros(n, n)
    } else {
        let v_inv = vmu
            .clone()
            .cholesky()
            .ok_or_else(|| {
                Error::SingularNoise("V(mu) must be invertible for the information form".into())
            })?
            .inverse();
        cmu.transpose() * v_inv * &cmu
    };
    let mut state = IterationState::start(sys.w().clone());
    loop {
        let sigma_inv = state
            .sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::SingularNoise("covariance iterate is singular".into()))?
            .inverse();
        let mut info = sigma_inv + &r_mu;
        linalg::symmetrize(&mut info);
        let inner = info
            .cholesky()
            .ok_or_else(|| Error::SingularNoise("information matrix is singular".into()))?
            .inverse();
        let mut next = sys.w() + sys.a() * inner * sys.a().transpose();
        linalg::symmetrize(&mut next);
        let delta = state.advance(next);
        if delta < CONVERGENCE_TOL {
            return finish(sys, &cmu, &vmu, state);
        }
        if state.k >= MAX_ITERATIONS {
            return Err(Error::NonConvergence {
                max_iterations: MAX_ITERATIONS,
            });
        }
    }
}

/// Recover the a-posteriori covariance `Σ*` from `Σ = AΣ*Aᵀ + W`.
///
/// Requires an invertible `A`; a singular `A` leaves `Σ*` underdetermined.
pub fn posterior_from_prior(sys: &SystemModel, prior: &SteadyState) -> Result<DMatrix<f64>> {
    let sigma = match prior {
        SteadyState::Finite { sigma, .. } => sigma,
        SteadyState::Unbounded => return Err(Error::UnboundedInput),
    };
    if sigma.shape() != (sys.n(), sys.n()) {
        return Err(Error::DimensionMismatch(format!(
            "prior covariance is {}x{} but the system has {} states",
            sigma.nrows(),
            sigma.ncols(),
            sys.n()
        )));
    }
    let sv = linalg::singular_values(sys.a());
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smax == 0.0 || smin <= PINV_CUTOFF * smax {
        return Err(Error::NotRecoverable);
    }
    let lu = sys.a().clone().lu();
    let rhs = sigma - sys.w();
    // Σ* = A⁻¹ (Σ − W) A⁻ᵀ, solved as two triangular systems.
    let half = lu.solve(&rhs).ok_or(Error::NotRecoverable)?;
    let mut posterior = lu
        .solve(&half.transpose())
        .ok_or(Error::NotRecoverable)?
        .transpose();
    linalg::symmetrize(&mut posterior);
    let residual = linalg::max_abs_diff(&(sys.a() * &posterior * sys.a().transpose() + sys.w()), sigma);
    if residual > 1e-8 {
        return Err(Error::NotRecoverable);
    }
    Ok(posterior)
}

/// Closed-form steady-state variance of the scalar channel `A = λ₁`, `C = 1`,
/// `W = 1`, `V = α²`:
///
/// ```text
/// Σ₁₁ = (1 + α²λ₁² − α² + √((α² − α²λ₁² − 1)² + 4α²)) / 2
/// ```
pub fn scalar_sigma11(lambda1: f64, alpha_sq: f64) -> Result<f64> {
    if !(lambda1.abs() > 0.0 && lambda1.abs() < 1.0) {
        return Err(Error::DomainError(format!(
            "lambda1 must satisfy 0 < |lambda1| < 1, got {lambda1}"
        )));
    }
    if alpha_sq < 0.0 || !alpha_sq.is_finite() {
        return Err(Error::DomainError(format!(
            "alpha squared must be nonnegative and finite, got {alpha_sq}"
        )));
    }
    // With p = α² − α²λ₁² − 1 the root is (√(p² + 4α²) − p)/2; for p > 0 the
    // subtraction cancels, so use the equivalent 2α²/(√(p² + 4α²) + p) there.
    let p = alpha_sq * (1.0 - lambda1 * lambda1) - 1.0;
    let root = (p * p + 4.0 * alpha_sq).sqrt();
    if p > 0.0 {
        Ok(2.0 * alpha_sq / (root + p))
    } else {
        Ok((root - p) / 2.0)
    }
}
