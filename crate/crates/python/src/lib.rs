//! Python bindings. Matrices cross the boundary as lists of rows; reports
//! and ledgers come back as plain dicts.

use hessk::linalg::{sym_eigen as eigen, DenseMatrix};
use hessk::matform::{self, AdmissibilityParams};
use hessk::sympoly::{self, Spectrum};
use hessk::verify::{self, SuiteConfig};
use hessk::{scalarform, Error};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spectrum(lam: Vec<f64>) -> PyResult<Spectrum> {
    Spectrum::new(lam).map_err(err)
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).map_err(err)
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any(),
            (None, None) => n.to_string().into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(o) => {
            let dict = PyDict::new(py);
            for (k, x) in o {
                dict.set_item(k, to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &value)
}

/// The γ_k schedule for `(n, k)`. `free_gamma` is used on the free branch only.
#[pyclass(name = "GammaSchedule", frozen)]
struct PyGammaSchedule(sympoly::GammaSchedule);

#[pymethods]
impl PyGammaSchedule {
    #[new]
    #[pyo3(signature = (n, k, free_gamma=None))]
    fn new(n: usize, k: usize, free_gamma: Option<f64>) -> PyResult<Self> {
        sympoly::gamma_schedule(n, k, free_gamma).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k
    }

    #[getter]
    fn gamma_k(&self) -> f64 {
        self.0.gamma_k
    }

    #[getter]
    fn branch(&self) -> &'static str {
        self.0.branch.as_str()
    }

    /// Whether `lam` lies in Σ_(γ_k).
    fn contains(&self, lam: Vec<f64>) -> PyResult<bool> {
        Ok(sympoly::in_sigma_gamma(&spectrum(lam)?, &self.0))
    }

    fn __repr__(&self) -> String {
        format!(
            "GammaSchedule(n={}, k={}, gamma_k={}, branch={})",
            self.0.n,
            self.0.k,
            self.0.gamma_k,
            self.0.branch.as_str()
        )
    }
}

#[pyfunction]
fn sigma(k: usize, lam: Vec<f64>) -> PyResult<f64> {
    sympoly::sigma(k, &spectrum(lam)?).map_err(err)
}

#[pyfunction]
fn f_k(k: usize, lam: Vec<f64>) -> PyResult<f64> {
    scalarform::f_k(k, &spectrum(lam)?).map_err(err)
}

#[pyfunction]
fn d2f(k: usize, lam: Vec<f64>, xi: Vec<f64>) -> PyResult<f64> {
    scalarform::d2f(k, &spectrum(lam)?, &xi).map_err(err)
}

#[pyfunction]
fn tilde_coeff_matrix(k: usize, lam: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    Ok(scalarform::tilde_coeff_matrix(k, &spectrum(lam)?).map_err(err)?.entries().to_rows())
}

#[pyfunction]
fn g_matrix(k: usize, lam: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    Ok(scalarform::g_matrix(k, &spectrum(lam)?).map_err(err)?.to_rows())
}

#[pyfunction]
#[pyo3(name = "S_k")]
fn s_k(r: Vec<Vec<f64>>, k: usize) -> PyResult<f64> {
    matform::s_k(&matrix(r)?, k).map_err(err)
}

#[pyfunction]
#[pyo3(name = "F_k")]
fn log_s_k(r: Vec<Vec<f64>>, k: usize) -> PyResult<f64> {
    matform::log_s_k(&matrix(r)?, k).map_err(err)
}

#[pyfunction]
#[pyo3(name = "grad_F_k")]
fn grad_log_s_k(r: Vec<Vec<f64>>, k: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(matform::grad_log_s_k(&matrix(r)?, k).map_err(err)?.to_rows())
}

#[pyfunction]
#[pyo3(name = "d2F")]
fn d2_log_s_k(r: Vec<Vec<f64>>, k: usize, m: Vec<Vec<f64>>) -> PyResult<f64> {
    matform::d2_log_s_k(&matrix(r)?, k, &matrix(m)?).map_err(err)
}

/// Returns `{"r_tilde", "m_tilde", "eigenvalues", "basis"}`.
#[pyfunction]
fn conjugate_reduce<'py>(py: Python<'py>, r: Vec<Vec<f64>>, m: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let red = matform::conjugate_reduce(&matrix(r)?, &matrix(m)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("r_tilde", red.r_tilde.to_rows())?;
    d.set_item("m_tilde", red.m_tilde.to_rows())?;
    d.set_item("eigenvalues", red.eigenvalues)?;
    d.set_item("basis", red.basis.to_rows())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (r, delta, mu, schedule=None))]
fn in_admissible(r: Vec<Vec<f64>>, delta: f64, mu: f64, schedule: Option<&PyGammaSchedule>) -> PyResult<bool> {
    let params = AdmissibilityParams::new(delta, mu, schedule.map(|s| s.0)).map_err(err)?;
    Ok(matform::in_admissible(&matrix(r)?, &params))
}

#[pyfunction]
#[pyo3(signature = (schedule, budget=2000, seed=0))]
fn estimate_gamma_uniform<'py>(
    py: Python<'py>,
    schedule: &PyGammaSchedule,
    budget: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let e = py.detach(|| verify::estimate_gamma_uniform(&schedule.0, budget, seed)).map_err(err)?;
    serialize(py, &e)
}

/// The constants ledger for `(n, k, δ)` given an estimate of γ^(k).
#[pyfunction]
#[pyo3(signature = (schedule, delta, gamma_uniform))]
fn build_ledger<'py>(
    py: Python<'py>,
    schedule: &PyGammaSchedule,
    delta: f64,
    gamma_uniform: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let s = &schedule.0;
    serialize(py, &verify::build_ledger(s.n, s.k, delta, s, gamma_uniform).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (name, n, k, delta, free_gamma=0.5, samples=1000, seed=0, mu=1.0, gamma_budget=2000))]
#[allow(clippy::too_many_arguments)]
fn run_suite<'py>(
    py: Python<'py>,
    name: &str,
    n: usize,
    k: usize,
    delta: f64,
    free_gamma: f64,
    samples: usize,
    seed: u64,
    mu: f64,
    gamma_budget: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = SuiteConfig::new(n, k, delta, free_gamma, samples, seed).map_err(err)?;
    cfg.mu = mu;
    cfg.gamma_budget = gamma_budget;
    let report = py.detach(|| verify::run_suite(name, &cfg)).map_err(err)?;
    serialize(py, &report)
}

/// `(values, vectors)` with values descending and eigenvectors as columns.
#[pyfunction]
fn sym_eigen(a: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let e = eigen(&matrix(a)?).map_err(err)?;
    Ok((e.values, e.vectors.to_rows()))
}

#[pymodule]
fn pyhessk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGammaSchedule>()?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(f_k, m)?)?;
    m.add_function(wrap_pyfunction!(d2f, m)?)?;
    m.add_function(wrap_pyfunction!(tilde_coeff_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(g_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(s_k, m)?)?;
    m.add_function(wrap_pyfunction!(log_s_k, m)?)?;
    m.add_function(wrap_pyfunction!(grad_log_s_k, m)?)?;
    m.add_function(wrap_pyfunction!(d2_log_s_k, m)?)?;
    m.add_function(wrap_pyfunction!(conjugate_reduce, m)?)?;
    m.add_function(wrap_pyfunction!(in_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_gamma_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(build_ledger, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(sym_eigen, m)?)?;
    m.add("SUITE_NAMES", verify::SUITE_NAMES.to_vec())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::ffi::c_str;

    fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyModule>)>(f: F) {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "pyhessk").unwrap();
            pyhessk(&m).unwrap();
            f(py, &m);
        });
    }

    #[test]
    fn functions_round_trip() {
        with_module(|py, m| {
            let locals = PyDict::new(py);
            locals.set_item("h", m).unwrap();
            py.run(
                c_str!(
                    "assert h.sigma(2, [1.0, 2.0, 3.0]) == 11.0\n\
                     assert abs(h.d2f(3, [1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0]) + 3) < 1e-12\n\
                     s = h.GammaSchedule(5, 3, 0.5)\n\
                     assert s.branch == 'FREE' and s.contains([1, 1, 1, 0.6, 0.7])\n\
                     r = [[2.0, 0.5], [-0.5, 3.0]]\n\
                     assert h.S_k(r, 2) == 6.25\n\
                     assert h.in_admissible(r, 0.5, 0.5)\n"
                ),
                None,
                Some(&locals),
            )
            .unwrap();
        });
    }

    #[test]
    fn errors_become_value_errors() {
        with_module(|py, m| {
            let e = m.getattr("sigma").unwrap().call1((2usize, vec![1.0f64])).unwrap_err();
            assert!(e.is_instance_of::<PyValueError>(py));
        });
    }

    #[test]
    fn suite_reports_are_dicts() {
        with_module(|py, m| {
            let r =
                m.getattr("run_suite").unwrap().call1(("minors", 4usize, 2usize, 0.05f64, 0.5f64, 20usize)).unwrap();
            let d = r.cast::<PyDict>().unwrap();
            let v: usize = d.get_item("violations").unwrap().unwrap().extract().unwrap();
            assert_eq!(v, 0);
            assert!(d.get_item("wall_ms").unwrap().unwrap().is_none());
            let _ = py;
        });
    }
}
