//! Python bindings. Results come back as plain dicts (decoded from the
//! library's JSON serialization), weights as JSON strings in the same
//! schema the command-line tool reads.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use loggas::config::{read_measure, RunConfig};
use loggas::equilibrium::{free_entropy, solve_equilibrium, EquilibriumOptions};
use loggas::fekete::{solve_fekete, transfinite_diameter, FeketeOptions};
use loggas::montecarlo::{log_z as mc_log_z, BaseMeasure, ChainOptions};
use loggas::vdm::WeightSpec;
use loggas::{Complex64, Configuration, Rectangle, WeightFunction};

fn err(e: loggas::Error) -> PyErr {
    match e {
        loggas::Error::Io(_) | loggas::Error::Json(_) | loggas::Error::Csv(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rectangle(rect: Vec<f64>) -> PyResult<Rectangle> {
    match rect.as_slice() {
        [a, b] => Rectangle::interval(*a, *b).map_err(err),
        [x0, x1, y0, y1] => Rectangle::new(*x0, *x1, *y0, *y1).map_err(err),
        _ => Err(PyValueError::new_err(
            "rect needs 2 (interval) or 4 numbers",
        )),
    }
}

fn weight(json: Option<&str>, rect: Rectangle) -> PyResult<WeightFunction> {
    match json {
        None => Ok(WeightFunction::unit(rect)),
        Some(text) => {
            let spec: WeightSpec =
                serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
            WeightFunction::new(spec, rect).map_err(err)
        }
    }
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// log|VDM| of complex points.
#[pyfunction]
fn log_vdm(points: Vec<Complex64>) -> PyResult<f64> {
    let c = Configuration::new(points).map_err(err)?;
    loggas::vdm::log_vdm(&c).map_err(err)
}

/// log|VDM^w| of complex points for a weight on `rect`.
#[pyfunction]
#[pyo3(signature = (points, rect, weight_json=None))]
fn log_wvdm(points: Vec<Complex64>, rect: Vec<f64>, weight_json: Option<&str>) -> PyResult<f64> {
    let r = rectangle(rect)?;
    let w = weight(weight_json, r)?;
    let c = Configuration::new(points).map_err(err)?;
    loggas::vdm::log_wvdm(&c, &w).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (rect, d, weight_json=None, seed=0, restarts=4))]
fn fekete<'py>(
    py: Python<'py>,
    rect: Vec<f64>,
    d: usize,
    weight_json: Option<&str>,
    seed: u64,
    restarts: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let r = rectangle(rect)?;
    let w = weight(weight_json, r)?;
    let opts = FeketeOptions {
        restarts,
        ..Default::default()
    };
    let out = py
        .detach(|| solve_fekete(&r, &w, d, &opts, seed))
        .map_err(err)?;
    to_py(py, &out)
}

#[pyfunction]
#[pyo3(signature = (rect, d_list, weight_json=None, seed=0))]
fn diameter<'py>(
    py: Python<'py>,
    rect: Vec<f64>,
    d_list: Vec<usize>,
    weight_json: Option<&str>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = rectangle(rect)?;
    let w = weight(weight_json, r)?;
    let out = py
        .detach(|| transfinite_diameter(&r, &w, &d_list, &FeketeOptions::default(), seed))
        .map_err(err)?;
    to_py(py, &out)
}

#[pyfunction]
#[pyo3(signature = (rect, n, weight_json=None))]
fn equilibrium<'py>(
    py: Python<'py>,
    rect: Vec<f64>,
    n: usize,
    weight_json: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let r = rectangle(rect)?;
    let w = weight(weight_json, r)?;
    let out = py
        .detach(|| solve_equilibrium(&r, &w, n, &EquilibriumOptions::default()))
        .map_err(err)?;
    to_py(py, &out)
}

/// Free entropy of a measure file (CSV, or JSON by extension).
#[pyfunction]
fn entropy(path: &str) -> PyResult<f64> {
    let m = read_measure(std::path::Path::new(path)).map_err(err)?;
    Ok(free_entropy(&m))
}

#[pyfunction]
#[pyo3(signature = (rect, d, weight_json=None, seed=0, samples=4000))]
fn log_z<'py>(
    py: Python<'py>,
    rect: Vec<f64>,
    d: usize,
    weight_json: Option<&str>,
    seed: u64,
    samples: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let r = rectangle(rect)?;
    let w = weight(weight_json, r)?;
    let tau = BaseMeasure::lebesgue(r).map_err(err)?;
    let opts = ChainOptions {
        samples,
        ..Default::default()
    };
    let out = py
        .detach(|| mc_log_z(&w, &tau, d, seed, &opts))
        .map_err(err)?;
    to_py(py, &out)
}

/// Runs check suites from a run-configuration JSON string.
#[pyfunction]
fn verify<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RunConfig::from_json(config_json).map_err(err)?;
    let report = py.detach(|| loggas::verify::verify(&cfg)).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn loggas_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", loggas::VERSION)?;
    m.add_function(wrap_pyfunction!(log_vdm, m)?)?;
    m.add_function(wrap_pyfunction!(log_wvdm, m)?)?;
    m.add_function(wrap_pyfunction!(fekete, m)?)?;
    m.add_function(wrap_pyfunction!(diameter, m)?)?;
    m.add_function(wrap_pyfunction!(equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(log_z, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
