//! Python bindings: the main fitting, testing, and simulation entry points,
//! returned as plain dicts/lists so the module has no Python-side wrapper
//! classes to keep in sync.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyList, PyString};
use serde_json::Value;

use ladbias::biastest;
use ladbias::cli::{cmd_test, OutputFormat, RunConfig};
use ladbias::lad;
use ladbias::numerics::rng::Rng;
use ladbias::regression::{self, BpVariant, Dataset};
use ladbias::simulate;

fn to_py_err(e: ladbias::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn dataset(
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    y: Vec<f64>,
    intercept: bool,
) -> PyResult<Dataset> {
    Dataset::from_columns(names, &columns, y, intercept).map_err(to_py_err)
}

fn json_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any().unbind(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any().unbind()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any().unbind()
            } else {
                PyFloat::new(py, n.as_f64().unwrap_or(f64::NAN))
                    .into_any()
                    .unbind()
            }
        }
        Value::String(s) => PyString::new(py, s).into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn serialize_to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

fn bp_variant(name: &str) -> PyResult<BpVariant> {
    match name.to_ascii_lowercase().as_str() {
        "levels" => Ok(BpVariant::Levels),
        "squares" => Ok(BpVariant::Squares),
        other => Err(PyValueError::new_err(format!(
            "bp variant must be 'levels' or 'squares', got {other:?}"
        ))),
    }
}

/// Fisher transformation of a correlation.
#[pyfunction]
fn fisher_z(r: f64) -> PyResult<f64> {
    biastest::fisher_z(r).map_err(to_py_err)
}

/// Normal-approximation statistic z * sqrt(n - 3).
#[pyfunction]
fn zstat_normal(r: f64, n: usize) -> PyResult<f64> {
    biastest::zstat_normal(r, n).map_err(to_py_err)
}

/// Pearson correlation of two sequences.
#[pyfunction]
fn pearson_r(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    biastest::pearson_r(&a, &b).map_err(to_py_err)
}

/// Plug-in Newey-West lag, floor(4 (n/100)^(2/9)).
#[pyfunction]
fn default_lag(n: usize) -> usize {
    regression::default_lag(n)
}

/// Seeded gaussian draws from stream `stream` of `seed` (sigma is a
/// standard deviation).
#[pyfunction]
fn sample_normal(seed: u64, stream: u64, mu: f64, sigma: f64, n: usize) -> PyResult<Vec<f64>> {
    Rng::new(seed, stream)
        .sample_normal(mu, sigma, n)
        .map_err(to_py_err)
}

/// OLS with Newey-West HAC standard errors.
#[pyfunction]
#[pyo3(signature = (columns, names, y, intercept=true, lag=None))]
fn ols_fit(
    py: Python<'_>,
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    y: Vec<f64>,
    intercept: bool,
    lag: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let data = dataset(columns, names, y, intercept)?;
    let fit = regression::ols_fit(&data, lag).map_err(to_py_err)?;
    let mut v = serde_json::to_value(&fit).map_err(|e| PyValueError::new_err(e.to_string()))?;
    v["residuals"] = serde_json::json!(fit.residuals);
    v["fitted"] = serde_json::json!(fit.fitted);
    json_to_py(py, &v)
}

/// Median (LAD) regression by smoothed IRLS with vertex polishing.
#[pyfunction]
#[pyo3(signature = (columns, names, y, intercept=true))]
fn lad_fit(
    py: Python<'_>,
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    y: Vec<f64>,
    intercept: bool,
) -> PyResult<Py<PyAny>> {
    let data = dataset(columns, names, y, intercept)?;
    let fit = lad::lad_fit_default(&data).map_err(to_py_err)?;
    let mut v = serde_json::to_value(&fit).map_err(|e| PyValueError::new_err(e.to_string()))?;
    v["residuals"] = serde_json::json!(fit.residuals);
    json_to_py(py, &v)
}

/// Exact LAD for desk-size instances (enumeration oracle).
#[pyfunction]
#[pyo3(signature = (columns, names, y, intercept=true))]
fn lad_fit_exact(
    py: Python<'_>,
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    y: Vec<f64>,
    intercept: bool,
) -> PyResult<Py<PyAny>> {
    let data = dataset(columns, names, y, intercept)?;
    let fit = lad::lad_fit_exact(&data).map_err(to_py_err)?;
    let mut v = serde_json::to_value(&fit).map_err(|e| PyValueError::new_err(e.to_string()))?;
    v["residuals"] = serde_json::json!(fit.residuals);
    json_to_py(py, &v)
}

/// Koenker-studentized Breusch-Pagan test on an OLS fit of the data.
#[pyfunction]
#[pyo3(signature = (columns, names, y, intercept=true, variant="levels", lag=None))]
fn breusch_pagan(
    py: Python<'_>,
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    y: Vec<f64>,
    intercept: bool,
    variant: &str,
    lag: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let data = dataset(columns, names, y, intercept)?;
    let fit = regression::ols_fit(&data, lag).map_err(to_py_err)?;
    let bp = regression::breusch_pagan(&data, &fit, bp_variant(variant)?).map_err(to_py_err)?;
    serialize_to_py(py, &bp)
}

/// The bootstrap bias test: LAD residual correlations per regressor with
/// bootstrap-calibrated zstats, confidence intervals, and decisions.
#[pyfunction]
#[pyo3(signature = (columns, names, y, intercept=true, b=1000, seed=20250801, critical=1.96))]
#[allow(clippy::too_many_arguments)]
fn bias_test(
    py: Python<'_>,
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    y: Vec<f64>,
    intercept: bool,
    b: usize,
    seed: u64,
    critical: f64,
) -> PyResult<Py<PyAny>> {
    let data = dataset(columns, names, y, intercept)?;
    let report = biastest::bootstrap_bias_test(&data, b, seed, critical).map_err(to_py_err)?;
    serialize_to_py(py, &report)
}

/// Full CSV diagnostic (parse, OLS + HAC, Breusch-Pagan, bias test).
#[pyfunction]
#[pyo3(signature = (path, dep, regressors, log=None, b=1000, seed=20250801, lag=None,
                    alpha=0.05, critical=1.96, bp="levels"))]
#[allow(clippy::too_many_arguments)]
fn diagnose_csv(
    py: Python<'_>,
    path: &str,
    dep: &str,
    regressors: Vec<String>,
    log: Option<Vec<String>>,
    b: usize,
    seed: u64,
    lag: Option<usize>,
    alpha: f64,
    critical: f64,
    bp: &str,
) -> PyResult<Py<PyAny>> {
    let config = RunConfig {
        input_path: path.to_string(),
        dep: dep.to_string(),
        regressors,
        log_columns: log.unwrap_or_default(),
        bootstrap_b: b,
        seed,
        lag,
        alpha,
        critical_value: critical,
        bp_variant: bp_variant(bp)?,
        format: OutputFormat::Json,
    };
    let report = cmd_test(&config).map_err(to_py_err)?;
    serialize_to_py(py, &report)
}

/// Replicated cell averages for one of the published simulation grids
/// (table1, table2, table3, delta5).
#[pyfunction]
#[pyo3(signature = (table, reps=500, b=200, seed=20250801))]
fn run_table(
    py: Python<'_>,
    table: &str,
    reps: usize,
    b: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let t: simulate::Table = table.parse().map_err(to_py_err)?;
    let cells = simulate::run_table(t, reps, b, seed).map_err(to_py_err)?;
    serialize_to_py(py, &cells)
}

/// Crate version.
#[pyfunction]
fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

#[pymodule]
fn ladbias_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(fisher_z, m)?)?;
    m.add_function(wrap_pyfunction!(zstat_normal, m)?)?;
    m.add_function(wrap_pyfunction!(pearson_r, m)?)?;
    m.add_function(wrap_pyfunction!(default_lag, m)?)?;
    m.add_function(wrap_pyfunction!(sample_normal, m)?)?;
    m.add_function(wrap_pyfunction!(ols_fit, m)?)?;
    m.add_function(wrap_pyfunction!(lad_fit, m)?)?;
    m.add_function(wrap_pyfunction!(lad_fit_exact, m)?)?;
    m.add_function(wrap_pyfunction!(breusch_pagan, m)?)?;
    m.add_function(wrap_pyfunction!(bias_test, m)?)?;
    m.add_function(wrap_pyfunction!(diagnose_csv, m)?)?;
    m.add_function(wrap_pyfunction!(run_table, m)?)?;
    m.add_function(wrap_pyfunction!(version, m)?)?;
    Ok(())
}
