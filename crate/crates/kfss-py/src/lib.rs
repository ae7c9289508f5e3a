//! Python bindings for the sensor-selection library. Matrices cross the
//! boundary as nested lists of floats (row major).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use kfss::instances as inst;
use kfss::riccati;
use kfss::selection;
use kfss::verify;
use nalgebra::DMatrix;

fn to_py_err(e: kfss::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> PyResult<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err(format!("{what}: ragged rows")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(nrows, ncols, &flat))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Plant dynamics and process-noise covariance.
#[pyclass(name = "SystemModel", frozen)]
struct PySystemModel {
    inner: riccati::SystemModel,
}

#[pymethods]
impl PySystemModel {
    #[new]
    fn new(a: Vec<Vec<f64>>, w: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = riccati::SystemModel::new(
            matrix_from_rows(&a, "a")?,
            matrix_from_rows(&w, "w")?,
        )
        .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn a(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(self.inner.a())
    }

    #[getter]
    fn w(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(self.inner.w())
    }
}

/// Candidate sensors: one measurement matrix per sensor, joint noise
/// covariance, installation costs.
#[pyclass(name = "SensorCatalog", frozen)]
struct PySensorCatalog {
    inner: riccati::SensorCatalog,
}

#[pymethods]
impl PySensorCatalog {
    #[new]
    fn new(
        n: usize,
        sensors: Vec<Vec<Vec<f64>>>,
        v: Vec<Vec<f64>>,
        costs: Vec<f64>,
    ) -> PyResult<Self> {
        let rows = sensors
            .iter()
            .enumerate()
            .map(|(i, s)| matrix_from_rows(s, &format!("sensor {}", i + 1)))
            .collect::<PyResult<Vec<_>>>()?;
        let inner =
            riccati::SensorCatalog::new(n, rows, matrix_from_rows(&v, "v")?, costs)
                .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q()
    }

    #[getter]
    fn costs(&self) -> Vec<f64> {
        self.inner.costs().to_vec()
    }
}

/// Converged steady-state covariance; `trace` is +inf when unbounded.
#[pyclass(name = "SteadyState", frozen)]
struct PySteadyState {
    inner: riccati::SteadyState,
}

#[pymethods]
impl PySteadyState {
    #[getter]
    fn is_finite(&self) -> bool {
        self.inner.is_finite()
    }

    #[getter]
    fn trace(&self) -> f64 {
        self.inner.trace_extended()
    }

    #[getter]
    fn sigma(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.sigma().map(matrix_to_rows)
    }

    #[getter]
    fn iterations(&self) -> Option<usize> {
        self.inner.iterations()
    }

    fn __repr__(&self) -> String {
        if self.inner.is_finite() {
            format!("SteadyState(trace={})", self.inner.trace_extended())
        } else {
            "SteadyState(unbounded)".to_string()
        }
    }
}

/// Optimizer outcome: the chosen mask plus its steady state; `picks` and
/// `trace_history` are filled by the greedy algorithm only.
#[pyclass(name = "SelectionResult", frozen)]
struct PySelectionResult {
    mask: String,
    picks: Vec<usize>,
    trace_history: Vec<f64>,
    trace: f64,
}

#[pymethods]
impl PySelectionResult {
    #[getter]
    fn mask(&self) -> &str {
        &self.mask
    }

    /// 0-based sensor indices in pick order.
    #[getter]
    fn picks(&self) -> Vec<usize> {
        self.picks.clone()
    }

    #[getter]
    fn trace_history(&self) -> Vec<f64> {
        self.trace_history.clone()
    }

    #[getter]
    fn trace(&self) -> f64 {
        self.trace
    }

    fn __repr__(&self) -> String {
        format!("SelectionResult(mask={:?}, trace={})", self.mask, self.trace)
    }
}

impl From<selection::SelectionResult> for PySelectionResult {
    fn from(r: selection::SelectionResult) -> Self {
        Self {
            mask: r.selection.mask_string(),
            picks: r.picks,
            trace_history: r.trace_history,
            trace: r.steady.trace_extended(),
        }
    }
}

/// A generated hardness instance with its provenance parameters.
#[pyclass(name = "HardnessInstance", frozen)]
struct PyHardnessInstance {
    inner: inst::HardnessInstance,
}

#[pymethods]
impl PyHardnessInstance {
    #[getter]
    fn system(&self) -> PySystemModel {
        PySystemModel {
            inner: self.inner.sys.clone(),
        }
    }

    #[getter]
    fn catalog(&self) -> PySensorCatalog {
        PySensorCatalog {
            inner: self.inner.catalog.clone(),
        }
    }

    #[getter]
    fn budget(&self) -> f64 {
        self.inner.budget
    }

    /// Instance file text (round-trips through `parse_instance`).
    fn to_text(&self) -> String {
        inst::serialize_instance(&self.inner)
    }
}

#[pyfunction]
fn solve_dare(
    sys: &PySystemModel,
    catalog: &PySensorCatalog,
    mask: &str,
) -> PyResult<PySteadyState> {
    let sel = riccati::Selection::from_mask_str(mask, mask.len() as f64).map_err(to_py_err)?;
    let inner = riccati::solve_dare(&sys.inner, &catalog.inner, &sel).map_err(to_py_err)?;
    Ok(PySteadyState { inner })
}

#[pyfunction]
fn solve_dare_information_form(
    sys: &PySystemModel,
    catalog: &PySensorCatalog,
    mask: &str,
) -> PyResult<PySteadyState> {
    let sel = riccati::Selection::from_mask_str(mask, mask.len() as f64).map_err(to_py_err)?;
    let inner = riccati::solve_dare_information_form(&sys.inner, &catalog.inner, &sel)
        .map_err(to_py_err)?;
    Ok(PySteadyState { inner })
}

#[pyfunction]
fn scalar_sigma11(lambda1: f64, alpha_sq: f64) -> PyResult<f64> {
    riccati::scalar_sigma11(lambda1, alpha_sq).map_err(to_py_err)
}

#[pyfunction]
fn greedy_select(
    sys: &PySystemModel,
    catalog: &PySensorCatalog,
    budget: usize,
) -> PyResult<PySelectionResult> {
    selection::greedy_select(&sys.inner, &catalog.inner, budget)
        .map(Into::into)
        .map_err(to_py_err)
}

#[pyfunction]
fn exhaustive_select(
    sys: &PySystemModel,
    catalog: &PySensorCatalog,
    budget: f64,
) -> PyResult<PySelectionResult> {
    selection::exhaustive_select(&sys.inner, &catalog.inner, budget)
        .map(Into::into)
        .map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (m, collection, lambda1 = 0.5))]
fn build_theorem1_instance(
    m: usize,
    collection: Vec<[usize; 3]>,
    lambda1: f64,
) -> PyResult<PyHardnessInstance> {
    let x3c = inst::X3CInstance::new(m, collection).map_err(to_py_err)?;
    let inner = inst::build_theorem1_instance(&x3c, lambda1).map_err(to_py_err)?;
    Ok(PyHardnessInstance { inner })
}

#[pyfunction]
fn build_theorem2_instance(
    m: usize,
    collection: Vec<[usize; 3]>,
    k: f64,
) -> PyResult<PyHardnessInstance> {
    let x3c = inst::X3CInstance::new(m, collection).map_err(to_py_err)?;
    let inner = inst::build_theorem2_instance(&x3c, k).map_err(to_py_err)?;
    Ok(PyHardnessInstance { inner })
}

#[pyfunction]
fn build_example1_instance(lambda1: f64, h: f64) -> PyResult<PyHardnessInstance> {
    let inner = inst::build_example1_instance(lambda1, h).map_err(to_py_err)?;
    Ok(PyHardnessInstance { inner })
}

/// Lexicographically smallest exact cover (0-based subset indices), or None.
#[pyfunction]
fn x3c_oracle(m: usize, collection: Vec<[usize; 3]>) -> PyResult<Option<Vec<usize>>> {
    let x3c = inst::X3CInstance::new(m, collection).map_err(to_py_err)?;
    inst::x3c_oracle(&x3c).map_err(to_py_err)
}

/// (sigma1, sigma2, sigma3, sigma12, sigma23) of the greedy-failure family.
#[pyfunction]
fn theorem3_sigmas(lambda1: f64, h: f64) -> PyResult<(f64, f64, f64, f64, f64)> {
    let s = inst::theorem3_sigmas(lambda1, h).map_err(to_py_err)?;
    Ok((s.sigma1, s.sigma2, s.sigma3, s.sigma12, s.sigma23))
}

#[pyfunction]
fn theorem3_limit_ratio(lambda1: f64) -> f64 {
    inst::theorem3_limit_ratio(lambda1)
}

/// (measured_ratio, trace_greedy, trace_opt, predicted_ratio, limit_ratio)
/// of a greedy-vs-optimal run on the greedy-failure family.
#[pyfunction]
fn theorem3_ratio(lambda1: f64, h: f64) -> PyResult<(f64, f64, f64, f64, f64)> {
    let rep = verify::theorem3_ratio(lambda1, h).map_err(to_py_err)?;
    Ok((
        rep.ratio.ratio,
        rep.ratio.trace_alg,
        rep.ratio.trace_opt,
        rep.predicted_ratio,
        rep.limit_ratio,
    ))
}

#[pyfunction]
fn parse_instance(text: &str) -> PyResult<PyHardnessInstance> {
    let inner = inst::parse_instance(text).map_err(to_py_err)?;
    Ok(PyHardnessInstance { inner })
}

#[pymodule]
fn kfss_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemModel>()?;
    m.add_class::<PySensorCatalog>()?;
    m.add_class::<PySteadyState>()?;
    m.add_class::<PySelectionResult>()?;
    m.add_class::<PyHardnessInstance>()?;
    m.add_function(wrap_pyfunction!(solve_dare, m)?)?;
    m.add_function(wrap_pyfunction!(solve_dare_information_form, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_sigma11, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_select, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_select, m)?)?;
    m.add_function(wrap_pyfunction!(build_theorem1_instance, m)?)?;
    m.add_function(wrap_pyfunction!(build_theorem2_instance, m)?)?;
    m.add_function(wrap_pyfunction!(build_example1_instance, m)?)?;
    m.add_function(wrap_pyfunction!(x3c_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(theorem3_sigmas, m)?)?;
    m.add_function(wrap_pyfunction!(theorem3_limit_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(theorem3_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(parse_instance, m)?)?;
    Ok(())
}
