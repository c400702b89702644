//! Python bindings for `choi_sqpt`.
//!
//! Matrices cross the boundary as nested lists of Python `complex`, states as
//! flat lists. Library errors surface as `ValueError`.

use sqpt::basis::{chi_choi_to_pauli, chi_pauli_to_choi};
use sqpt::tomo::{self, ChiBasis};
use sqpt::{BackendConfig, ComplexMatrix, QuditIndexMap, Strategy};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: sqpt::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(ComplexMatrix::from_fn(n, m, |r, c| rows[r][c]))
}

fn backend(shots: Option<u64>, seed: u64) -> PyResult<BackendConfig> {
    match shots {
        None => Ok(BackendConfig::exact()),
        Some(s) => BackendConfig::sampled(s, seed).map_err(err),
    }
}

#[pyclass(name = "Channel", frozen)]
struct PyChannel(sqpt::QuantumChannel);

#[pymethods]
impl PyChannel {
    /// Builds a channel from Kraus operators given as nested lists of complex.
    #[new]
    fn new(kraus: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        let ops = kraus.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?;
        let dim = ops.first().map_or(0, |k| k.ncols());
        sqpt::QuantumChannel::new(dim, ops).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (name, params = Vec::new(), dim = 2))]
    fn preset(name: &str, params: Vec<f64>, dim: usize) -> PyResult<Self> {
        sqpt::QuantumChannel::preset(name, &params, dim).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        sqpt::QuantumChannel::from_json(text).map(Self).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn kraus(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.0.kraus().iter().map(rows).collect()
    }

    fn apply(&self, rho: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
        self.0.apply_operator(&matrix(rho)?).map(|m| rows(&m)).map_err(err)
    }

    fn chi_oracle(&self) -> PyChi {
        PyChi(self.0.chi_oracle())
    }

    /// Returns the validation report as a dict.
    #[pyo3(signature = (tol = sqpt::PHYSICAL_TOL))]
    fn validate<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let r = self.0.validate_cptp(tol).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("dim", r.dim)?;
        d.set_item("kraus_count", r.kraus_count)?;
        d.set_item("tp_deviation", r.tp_deviation)?;
        d.set_item("trace_preserving", r.trace_preserving)?;
        d.set_item("min_chi_eigenvalue", r.min_chi_eigenvalue)?;
        d.set_item("completely_positive", r.completely_positive)?;
        d.set_item("chi_trace", r.chi_trace)?;
        d.set_item("trace_law_holds", r.trace_law_holds)?;
        d.set_item("passed", r.passed())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Channel(dim={}, kraus={})", self.0.dim(), self.0.kraus().len())
    }
}

#[pyclass(name = "Chi", frozen)]
struct PyChi(sqpt::ChiMatrix);

#[pymethods]
impl PyChi {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        sqpt::ChiMatrix::from_json(text).map(Self).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn convention(&self) -> &'static str {
        self.0.basis().convention()
    }

    fn get(&self, e: usize, f: usize, g: usize, h: usize) -> PyResult<Complex64> {
        let d = self.0.dim();
        if [e, f, g, h].iter().any(|&i| i >= d) {
            return Err(PyValueError::new_err(format!("index out of range for dimension {d}")));
        }
        Ok(self.0.get(e, f, g, h))
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        rows(self.0.matrix())
    }

    fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    fn max_abs_diff(&self, other: &PyChi) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    fn to_pauli(&self) -> PyResult<Self> {
        chi_choi_to_pauli(&self.0, qubits(self.0.dim())?).map(Self).map_err(err)
    }

    fn to_choi(&self) -> PyResult<Self> {
        if self.0.basis() == ChiBasis::Choi {
            return Ok(Self(self.0.clone()));
        }
        chi_pauli_to_choi(&self.0, qubits(self.0.dim())?).map(Self).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Chi(dim={}, convention={:?})", self.0.dim(), self.0.basis().convention())
    }
}

fn qubits(dim: usize) -> PyResult<usize> {
    if dim >= 2 && dim.is_power_of_two() {
        Ok(dim.trailing_zeros() as usize)
    } else {
        Err(PyValueError::new_err(format!("Pauli basis needs a qubit system, got dimension {dim}")))
    }
}

#[pyclass(name = "Plan", frozen)]
struct PyPlan(tomo::MeasurementPlan);

#[pymethods]
impl PyPlan {
    #[getter]
    fn target(&self) -> [usize; 4] {
        self.0.target()
    }

    #[getter]
    fn lambda_target(&self) -> [usize; 4] {
        self.0.lambda_target()
    }

    fn __len__(&self) -> usize {
        self.0.settings_count()
    }

    /// `(input_state, weight)` for each setting; the observable is returned by `projectors`.
    fn inputs(&self) -> Vec<(Vec<Complex64>, Complex64)> {
        self.0
            .settings()
            .iter()
            .zip(self.0.setting_weights())
            .map(|(s, w)| (s.input().iter().copied().collect(), w))
            .collect()
    }

    fn projectors(&self) -> Vec<Vec<Complex64>> {
        self.0
            .settings()
            .iter()
            .map(|s| match s.observable() {
                sqpt::Observable::Projector(phi) => phi.iter().copied().collect(),
                sqpt::Observable::Hermitian(_) => Vec::new(),
            })
            .collect()
    }
}

#[pyfunction]
fn plan_element(e: usize, f: usize, g: usize, h: usize, dim: usize) -> PyResult<PyPlan> {
    tomo::plan_element(e, f, g, h, dim).map(PyPlan).map_err(err)
}

#[pyfunction]
fn plan_lambda_element(a: usize, b: usize, c: usize, d: usize, dim: usize) -> PyResult<PyPlan> {
    tomo::plan_lambda_element(a, b, c, d, dim).map(PyPlan).map_err(err)
}

/// Returns `(value, std_error, settings_used)`. `shots=None` selects the exact backend.
#[pyfunction]
#[pyo3(signature = (plan, channel, shots = None, seed = 0))]
fn reconstruct_element(plan: &PyPlan, channel: &PyChannel, shots: Option<u64>, seed: u64) -> PyResult<(Complex64, f64, usize)> {
    let est = tomo::reconstruct_element(&plan.0, &channel.0, &backend(shots, seed)?).map_err(err)?;
    Ok((est.value, est.std_error, est.settings_used))
}

/// Returns `(chi, std_errors, counts)` where counts holds distinct/measured/inferred settings.
#[pyfunction]
#[pyo3(signature = (channel, shots = None, seed = 0, strategy = "choi-four", local_dim = None, tp_shortcut = false))]
fn full_sqpt<'py>(
    py: Python<'py>,
    channel: &PyChannel,
    shots: Option<u64>,
    seed: u64,
    strategy: &str,
    local_dim: Option<usize>,
    tp_shortcut: bool,
) -> PyResult<(PyChi, Vec<Vec<f64>>, Bound<'py, PyDict>)> {
    let dim = channel.0.dim();
    let strategy = match strategy {
        "choi-four" => Strategy::ChoiFour,
        "product-hermitian" => {
            let local_dim = local_dim.unwrap_or(dim);
            let sites = (1..=usize::BITS)
                .find(|&n| local_dim.checked_pow(n) == Some(dim))
                .ok_or_else(|| PyValueError::new_err(format!("{dim} is not a power of {local_dim}")))?;
            Strategy::ProductHermitian {
                local_dim,
                sites: sites as usize,
            }
        }
        other => return Err(PyValueError::new_err(format!("unknown strategy {other:?}"))),
    };
    let res = tomo::full_sqpt(&channel.0, &backend(shots, seed)?, strategy, tp_shortcut).map_err(err)?;
    let errs = (0..res.std_errors.nrows())
        .map(|r| res.std_errors.row(r).iter().copied().collect())
        .collect();
    let counts = PyDict::new(py);
    counts.set_item("distinct", res.distinct_settings)?;
    counts.set_item("measured", res.measured_settings)?;
    counts.set_item("inferred", res.inferred_settings)?;
    Ok((PyChi(res.chi), errs, counts))
}

/// Returns `(differing_sites, factorization_error)` for the superposition states of `a`, `b`.
#[pyfunction]
fn ghz_profile(a: usize, b: usize, sites: usize, local_dim: usize) -> PyResult<(Vec<usize>, f64)> {
    let map = QuditIndexMap::new(sites, local_dim).map_err(err)?;
    let p = tomo::ghz_profile(a, b, &map).map_err(err)?;
    Ok((p.differing_sites, p.factorization_error))
}

#[pymodule]
fn choi_sqpt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannel>()?;
    m.add_class::<PyChi>()?;
    m.add_class::<PyPlan>()?;
    m.add_function(wrap_pyfunction!(plan_element, m)?)?;
    m.add_function(wrap_pyfunction!(plan_lambda_element, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_element, m)?)?;
    m.add_function(wrap_pyfunction!(full_sqpt, m)?)?;
    m.add_function(wrap_pyfunction!(ghz_profile, m)?)?;
    m.add("PRESETS", sqpt::channel::PRESET_NAMES.to_vec())?;
    Ok(())
}
