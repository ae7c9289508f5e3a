//! Adversarial instance families for the sensor-selection problem: the exact
//! 3-cover reduction, its inapproximability variant, the 3-state greedy-failure
//! family, a brute-force cover oracle, and instance (de)serialization.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::riccati::{SensorCatalog, SystemModel};

/// Version tag written into every instance file.
pub const SCHEMA_VERSION: u32 = 1;
/// Enumeration guard for the brute-force cover oracle.
pub const MAX_ORACLE_SUBSETS: usize = 24;

/// An exact-cover-by-3-sets instance: the ground set is `{1, …, 3m}` and the
/// collection holds 3-element subsets of it.
///
/// The empty collection is legal and is a trivial "no" instance; it is the
/// only way to produce a "no" instance at m = 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct X3CInstance {
    m: usize,
    collection: Vec<[usize; 3]>,
}

impl X3CInstance {
    /// Validates element ranges and distinctness within each subset; subsets
    /// are canonicalized to ascending order. Duplicate subsets are permitted.
    pub fn new(m: usize, collection: Vec<[usize; 3]>) -> Result<Self> {
        if m == 0 {
            return Err(Error::DomainError("m must be positive".into()));
        }
        let mut canonical = Vec::with_capacity(collection.len());
        for (i, subset) in collection.into_iter().enumerate() {
            let mut s = subset;
            s.sort_unstable();
            if s[0] == s[1] || s[1] == s[2] {
                return Err(Error::DomainError(format!(
                    "subset {} has repeated elements: {subset:?}",
                    i + 1
                )));
            }
            if s[0] < 1 || s[2] > 3 * m {
                return Err(Error::DomainError(format!(
                    "subset {} has elements outside 1..={}: {subset:?}",
                    i + 1,
                    3 * m
                )));
            }
            canonical.push(s);
        }
        Ok(Self {
            m,
            collection: canonical,
        })
    }

    /// Like [`X3CInstance::new`] but rejects identical subsets.
    pub fn new_strict(m: usize, collection: Vec<[usize; 3]>) -> Result<Self> {
        let inst = Self::new(m, collection)?;
        let mut seen = inst.collection.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DomainError(
                "collection contains identical subsets".into(),
            ));
        }
        Ok(inst)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Size of the ground set, 3m.
    pub fn ground_size(&self) -> usize {
        3 * self.m
    }

    pub fn tau(&self) -> usize {
        self.collection.len()
    }

    pub fn collection(&self) -> &[[usize; 3]] {
        &self.collection
    }
}

/// Which construction produced a [`HardnessInstance`], with enough parameters
/// to regenerate it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Provenance {
    Theorem1 {
        m: usize,
        tau: usize,
        lambda1: f64,
        collection: Vec<[usize; 3]>,
    },
    Theorem2 {
        m: usize,
        tau: usize,
        k: f64,
        lambda1: f64,
        epsilon: f64,
        collection: Vec<[usize; 3]>,
    },
    Example1 {
        lambda1: f64,
        h: f64,
    },
}

/// A fully materialized sensor-selection instance plus its provenance.
#[derive(Debug, Clone)]
pub struct HardnessInstance {
    pub sys: SystemModel,
    pub catalog: SensorCatalog,
    pub budget: f64,
    pub provenance: Provenance,
}

/// Incidence matrix `G ∈ {0,1}^{3m×τ}`; column i indicates subset cᵢ.
pub fn incidence_matrix(x3c: &X3CInstance) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(x3c.ground_size(), x3c.tau());
    for (i, subset) in x3c.collection().iter().enumerate() {
        for &element in subset {
            g[(element - 1, i)] = 1.0;
        }
    }
    g
}

/// Brute-force exact-cover decision: returns the lexicographically smallest
/// witness (0-based subset indices) when m members of the collection
/// partition the ground set, `None` otherwise.
pub fn x3c_oracle(x3c: &X3CInstance) -> Result<Option<Vec<usize>>> {
    let tau = x3c.tau();
    if tau > MAX_ORACLE_SUBSETS {
        return Err(Error::TooManySubsets {
            tau,
            max: MAX_ORACLE_SUBSETS,
        });
    }
    if x3c.m() > tau {
        return Ok(None);
    }
    let masks: Vec<u128> = x3c
        .collection()
        .iter()
        .map(|s| s.iter().fold(0u128, |acc, &e| acc | (1 << (e - 1))))
        .collect();
    let full: u128 = (1 << x3c.ground_size()) - 1;
    for combo in (0..tau).combinations(x3c.m()) {
        let mut covered = 0u128;
        let mut disjoint = true;
        for &i in &combo {
            if covered & masks[i] != 0 {
                disjoint = false;
                break;
            }
            covered |= masks[i];
        }
        if disjoint && covered == full {
            return Ok(Some(combo));
        }
    }
    Ok(None)
}

fn check_lambda1(lambda1: f64) -> Result<()> {
    if !(lambda1.abs() > 0.0 && lambda1.abs() < 1.0) || !lambda1.is_finite() {
        return Err(Error::DomainError(format!(
            "lambda1 must satisfy 0 < |lambda1| < 1, got {lambda1}"
        )));
    }
    Ok(())
}

/// Shared skeleton of the two reduction families: `A = diag(λ₁, 0, …, 0)`,
/// `W = I`, `V = 0`, unit costs, budget m+1, one sensor per subset plus the
/// distinguished first sensor `[1, scale·dᵀ]`.
fn build_reduction_instance(
    x3c: &X3CInstance,
    lambda1: f64,
    first_row_scale: f64,
    provenance: Provenance,
) -> Result<HardnessInstance> {
    let n = 3 * x3c.m() + 1;
    let q = x3c.tau() + 1;
    let mut a = DMatrix::zeros(n, n);
    a[(0, 0)] = lambda1;
    let sys = SystemModel::new(a, DMatrix::identity(n, n))?;
    let mut rows = Vec::with_capacity(q);
    let mut first = DMatrix::zeros(1, n);
    first[(0, 0)] = 1.0;
    for j in 1..n {
        first[(0, j)] = first_row_scale;
    }
    rows.push(first);
    let g = incidence_matrix(x3c);
    for i in 0..x3c.tau() {
        let mut row = DMatrix::zeros(1, n);
        for j in 0..3 * x3c.m() {
            row[(0, j + 1)] = g[(j, i)];
        }
        rows.push(row);
    }
    let catalog = SensorCatalog::new(n, rows, DMatrix::zeros(q, q), vec![1.0; q])?;
    Ok(HardnessInstance {
        sys,
        catalog,
        budget: (x3c.m() + 1) as f64,
        provenance,
    })
}

/// NP-hardness reduction instance: measurement matrix `[1 dᵀ; 0 Gᵀ]` on
/// 3m+1 states with budget m+1.
pub fn build_theorem1_instance(x3c: &X3CInstance, lambda1: f64) -> Result<HardnessInstance> {
    check_lambda1(lambda1)?;
    build_reduction_instance(
        x3c,
        lambda1,
        1.0,
        Provenance::Theorem1 {
            m: x3c.m(),
            tau: x3c.tau(),
            lambda1,
            collection: x3c.collection().to_vec(),
        },
    )
}

/// λ₁ of the inapproximability construction for gap factor `K`.
pub fn theorem2_lambda1(m: usize, k: f64) -> f64 {
    let base = k * (3 * m + 1) as f64 - (3 * m) as f64;
    (base - 0.5) / base
}

/// ε of the inapproximability construction for gap factor `K`.
pub fn theorem2_epsilon(m: usize, k: f64) -> f64 {
    let base = k * (3 * m + 1) as f64 - (3 * m) as f64;
    2.0 * base * (base - 1.0).sqrt().ceil() + 1.0
}

/// Inapproximability instance: measurement matrix `[1 εdᵀ; 0 Gᵀ]` with λ₁ and
/// ε chosen so that the yes/no trace gap exceeds the factor `K`.
pub fn build_theorem2_instance(x3c: &X3CInstance, k: f64) -> Result<HardnessInstance> {
    if k < 1.0 || !k.is_finite() {
        return Err(Error::DomainError(format!("K must be at least 1, got {k}")));
    }
    let lambda1 = theorem2_lambda1(x3c.m(), k);
    let epsilon = theorem2_epsilon(x3c.m(), k);
    build_reduction_instance(
        x3c,
        lambda1,
        epsilon,
        Provenance::Theorem2 {
            m: x3c.m(),
            tau: x3c.tau(),
            k,
            lambda1,
            epsilon,
            collection: x3c.collection().to_vec(),
        },
    )
}

/// The 3-state, 3-sensor family on which greedy selection is arbitrarily poor:
/// `A = diag(λ₁, 0, 0)`, rows `[1 h h]`, `[1 0 h]`, `[0 1 1]`, budget 2.
pub fn build_example1_instance(lambda1: f64, h: f64) -> Result<HardnessInstance> {
    check_lambda1(lambda1)?;
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::DomainError(format!("h must be positive, got {h}")));
    }
    let mut a = DMatrix::zeros(3, 3);
    a[(0, 0)] = lambda1;
    let sys = SystemModel::new(a, DMatrix::identity(3, 3))?;
    let rows = vec![
        DMatrix::from_row_slice(1, 3, &[1.0, h, h]),
        DMatrix::from_row_slice(1, 3, &[1.0, 0.0, h]),
        DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 1.0]),
    ];
    let catalog = SensorCatalog::new(3, rows, DMatrix::zeros(3, 3), vec![1.0; 3])?;
    Ok(HardnessInstance {
        sys,
        catalog,
        budget: 2.0,
        provenance: Provenance::Example1 { lambda1, h },
    })
}

/// First-state steady-state variances of the five relevant selections of the
/// greedy-failure family.
#[derive(Debug, Clone, Copy)]
pub struct Theorem3Sigmas {
    /// Sensor 1 alone, μ = [1,0,0].
    pub sigma1: f64,
    /// Sensor 2 alone, μ = [0,1,0].
    pub sigma2: f64,
    /// Sensor 3 alone, μ = [0,0,1]: state 1 unobserved.
    pub sigma3: f64,
    /// Sensors 1 and 2, μ = [1,1,0]; equals `sigma2` exactly.
    pub sigma12: f64,
    /// Sensors 2 and 3, μ = [0,1,1]: the greedy outcome.
    pub sigma23: f64,
}

/// Scalar channel variance as a function of the effective noise power α² > 0:
/// `2 / (√((1−λ₁²−1/α²)² + 4/α²) + 1 − λ₁² − 1/α²)`.
fn sigma_channel(lambda1: f64, alpha_sq: f64) -> f64 {
    let c = 1.0 - lambda1 * lambda1;
    let inv = 1.0 / alpha_sq;
    2.0 / (((c - inv).powi(2) + 4.0 * inv).sqrt() + c - inv)
}

/// Closed-form σ values of the greedy-failure family: the single-sensor
/// channels are σ(2h²), σ(h²) and the unobserved limit 1/(1−λ₁²); the pairs
/// give σ₁₂ = σ(h²) and σ₂₃ = σ(h²/2).
pub fn theorem3_sigmas(lambda1: f64, h: f64) -> Result<Theorem3Sigmas> {
    check_lambda1(lambda1)?;
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::DomainError(format!("h must be positive, got {h}")));
    }
    let h2 = h * h;
    let sigma2 = sigma_channel(lambda1, h2);
    Ok(Theorem3Sigmas {
        sigma1: sigma_channel(lambda1, 2.0 * h2),
        sigma2,
        sigma3: 1.0 / (1.0 - lambda1 * lambda1),
        sigma12: sigma2,
        sigma23: sigma_channel(lambda1, h2 / 2.0),
    })
}

/// Limiting greedy-to-optimal trace ratio of the greedy-failure family as
/// h → ∞: `2/3 + 1/(3(1−λ₁²))`.
pub fn theorem3_limit_ratio(lambda1: f64) -> f64 {
    2.0 / 3.0 + 1.0 / (3.0 * (1.0 - lambda1 * lambda1))
}

// ---------------------------------------------------------------------------
// Instance file format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    schema_version: u32,
    n: usize,
    q: usize,
    a: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    sensors: Vec<Vec<Vec<f64>>>,
    costs: Vec<f64>,
    budget: f64,
    provenance: Provenance,
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str, ncols: usize) -> Result<DMatrix<f64>> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Parse(format!(
                "{what}: row {} has {} entries, expected {ncols}",
                i + 1,
                row.len()
            )));
        }
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

/// JSON formatter that writes floats with 17 significant digits (always
/// enough to round-trip a double exactly) and pretty-prints structure.
struct FullPrecision<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

impl serde_json::ser::Formatter for FullPrecision<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object_value(writer)
    }
}

/// Serialize an instance to the versioned UTF-8 text format.
pub fn serialize_instance(inst: &HardnessInstance) -> String {
    let doc = InstanceDoc {
        schema_version: SCHEMA_VERSION,
        n: inst.sys.n(),
        q: inst.catalog.q(),
        a: matrix_to_rows(inst.sys.a()),
        w: matrix_to_rows(inst.sys.w()),
        v: matrix_to_rows(inst.catalog.v()),
        sensors: inst.catalog.rows().iter().map(matrix_to_rows).collect(),
        costs: inst.catalog.costs().to_vec(),
        budget: inst.budget,
        provenance: inst.provenance.clone(),
    };
    let mut out = Vec::new();
    let formatter = FullPrecision {
        inner: serde_json::ser::PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    doc.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("serializer emits UTF-8")
}

/// Parse and validate an instance document, including its provenance: the
/// stored matrices must match an exact regeneration from the provenance
/// parameters.
pub fn parse_instance(text: &str) -> Result<HardnessInstance> {
    let doc: InstanceDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    if doc.a.len() != doc.n {
        return Err(Error::Parse(format!(
            "a: has {} rows, expected n = {}",
            doc.a.len(),
            doc.n
        )));
    }
    if doc.sensors.len() != doc.q {
        return Err(Error::Parse(format!(
            "sensors: found {}, expected q = {}",
            doc.sensors.len(),
            doc.q
        )));
    }
    let a = rows_to_matrix(&doc.a, "a", doc.n)?;
    let w = rows_to_matrix(&doc.w, "w", doc.n)?;
    if doc.w.len() != doc.n {
        return Err(Error::Parse(format!(
            "w: has {} rows, expected n = {}",
            doc.w.len(),
            doc.n
        )));
    }
    let mut rows = Vec::with_capacity(doc.q);
    for (i, sensor) in doc.sensors.iter().enumerate() {
        rows.push(rows_to_matrix(sensor, &format!("sensor {}", i + 1), doc.n)?);
    }
    let total: usize = rows.iter().map(|r| r.nrows()).sum();
    if doc.v.len() != total {
        return Err(Error::Parse(format!(
            "v: has {} rows, expected total measurement rows {total}",
            doc.v.len()
        )));
    }
    let v = rows_to_matrix(&doc.v, "v", total)?;
    let sys = SystemModel::new(a, w).map_err(|e| Error::Parse(format!("system: {e}")))?;
    let catalog = SensorCatalog::new(doc.n, rows, v, doc.costs.clone())
        .map_err(|e| Error::Parse(format!("catalog: {e}")))?;
    let inst = HardnessInstance {
        sys,
        catalog,
        budget: doc.budget,
        provenance: doc.provenance,
    };
    validate_provenance(&inst)?;
    Ok(inst)
}

/// Regenerate the instance from its provenance and require an exact match.
fn validate_provenance(inst: &HardnessInstance) -> Result<()> {
    let expected = match &inst.provenance {
        Provenance::Theorem1 {
            m,
            tau,
            lambda1,
            collection,
        } => {
            let x3c = X3CInstance::new(*m, collection.clone())
                .map_err(|e| Error::Parse(format!("provenance collection: {e}")))?;
            if x3c.tau() != *tau {
                return Err(Error::Parse(format!(
                    "provenance: tau = {tau} but the collection has {} subsets",
                    x3c.tau()
                )));
            }
            build_theorem1_instance(&x3c, *lambda1)
                .map_err(|e| Error::Parse(format!("provenance: {e}")))?
        }
        Provenance::Theorem2 {
            m,
            tau,
            k,
            lambda1,
            epsilon,
            collection,
        } => {
            let x3c = X3CInstance::new(*m, collection.clone())
                .map_err(|e| Error::Parse(format!("provenance collection: {e}")))?;
            if x3c.tau() != *tau {
                return Err(Error::Parse(format!(
                    "provenance: tau = {tau} but the collection has {} subsets",
                    x3c.tau()
                )));
            }
            if *lambda1 != theorem2_lambda1(*m, *k) || *epsilon != theorem2_epsilon(*m, *k) {
                return Err(Error::Parse(
                    "provenance: lambda1/epsilon do not satisfy the gap formulas for the stored K"
                        .into(),
                ));
            }
            build_theorem2_instance(&x3c, *k)
                .map_err(|e| Error::Parse(format!("provenance: {e}")))?
        }
        Provenance::Example1 { lambda1, h } => build_example1_instance(*lambda1, *h)
            .map_err(|e| Error::Parse(format!("provenance: {e}")))?,
    };
    if inst.budget != expected.budget {
        return Err(Error::Parse(format!(
            "budget {} does not match the provenance budget {}",
            inst.budget, expected.budget
        )));
    }
    if inst.sys.a() != expected.sys.a() || inst.sys.w() != expected.sys.w() {
        return Err(Error::Parse(
            "system matrices do not match the provenance construction".into(),
        ));
    }
    if inst.catalog.v() != expected.catalog.v()
        || inst.catalog.costs() != expected.catalog.costs()
        || inst.catalog.rows() != expected.catalog.rows()
    {
        return Err(Error::Parse(
            "sensor catalog does not match the provenance construction".into(),
        ));
    }
    Ok(())
}
