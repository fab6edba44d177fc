//! Python bindings. Data is passed as a list of samples (rows), matching the
//! CSV layout of the command-line tool; options are the config-file keys.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qaop::circuit::{resource_report, Mode};
use qaop::numkit::DenseMatrix;
use qaop::pipeline::{run_pipeline, run_pipeline_on, RunConfig, RunMode, StageError};
use qaop::Error;

fn to_py(e: StageError) -> PyErr {
    match e.error {
        Error::Parse { .. }
        | Error::Configuration(_)
        | Error::InvalidParameter(_)
        | Error::InvalidInput(_)
        | Error::Io(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn config(options: Option<&Bound<'_, PyDict>>) -> PyResult<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(options) = options {
        for (key, value) in options.iter() {
            let key: String = key.extract()?;
            let value = if value.is_none() { "none".to_string() } else { value.str()?.to_string() };
            cfg.set(&key, &value).map_err(|e| PyValueError::new_err(e.to_string()))?;
        }
    }
    Ok(cfg)
}

/// Samples as rows in, features × samples out.
fn features(data: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    let x = DenseMatrix::from_rows(&data).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(x.transpose())
}

fn rows(a: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

fn run(data: Option<Vec<Vec<f64>>>, cfg: &RunConfig) -> PyResult<(String, Vec<Vec<f64>>)> {
    let out = match data {
        Some(d) => run_pipeline_on(&features(d)?, cfg),
        None => run_pipeline(cfg),
    }
    .map_err(to_py)?;
    Ok((out.report.to_json(), rows(&out.projection)))
}

/// Fit one mode. Returns the JSON report and the n × k projection.
#[pyfunction]
#[pyo3(signature = (data=None, **options))]
fn fit(data: Option<Vec<Vec<f64>>>, options: Option<&Bound<'_, PyDict>>) -> PyResult<(String, Vec<Vec<f64>>)> {
    run(data, &config(options)?)
}

/// Run the classical, spectral and matrix-level quantum paths and cross-check them.
#[pyfunction]
#[pyo3(signature = (data=None, **options))]
fn compare(data: Option<Vec<Vec<f64>>>, options: Option<&Bound<'_, PyDict>>) -> PyResult<(String, Vec<Vec<f64>>)> {
    let mut cfg = config(options)?;
    cfg.mode = RunMode::Compare;
    run(data, &cfg)
}

/// Qubit and gate counts of one gate-level iteration, as JSON.
#[pyfunction]
#[pyo3(signature = (n, **options))]
fn resources(n: usize, options: Option<&Bound<'_, PyDict>>) -> PyResult<String> {
    let cfg = config(options)?;
    let it = qaop::circuit::IterationConfig {
        mode: Mode::GateLevel,
        ..cfg.iteration_config(true)
    };
    it.validate().map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(serde_json::to_string_pretty(&resource_report(&it, n, cfg.k)).expect("serializable"))
}

#[pymodule]
#[pyo3(name = "qaop")]
fn qaop_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(resources, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
