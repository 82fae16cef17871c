//! Python bindings: expose the dataset model, metrics, bound checks,
//! the constrained solver, and the trade-off sweep as an extension
//! module named `inframargin`.

use std::path::Path;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use inframargin::dataset::LabeledDataset;
use inframargin::metrics::{self, DecisionVector, MetricsReport};
use inframargin::model::{self, TrainConfig, UnfairnessMetric};
use inframargin::optimize;
use inframargin::simgen;
use inframargin::theory;

fn to_py_err(e: inframargin::Error) -> PyErr {
    match e {
        inframargin::Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A finite weighted dataset with optional outcome probabilities and
/// sampled labels.
#[pyclass(name = "Dataset", module = "inframargin")]
struct PyDataset {
    inner: LabeledDataset,
}

#[pymethods]
impl PyDataset {
    /// Sample a dataset from one of the calibrated presets (S1..S5).
    #[staticmethod]
    fn simulate(preset: &str, n: usize, seed: u64) -> PyResult<Self> {
        let name: simgen::PresetName = preset.parse().map_err(to_py_err)?;
        let ds = simgen::sample_dataset(&simgen::preset(name), n, seed).map_err(to_py_err)?;
        Ok(PyDataset { inner: ds })
    }

    /// Read a canonical dataset CSV.
    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        let ds = LabeledDataset::read_csv_path(Path::new(path)).map_err(to_py_err)?;
        Ok(PyDataset { inner: ds })
    }

    /// Write the canonical dataset CSV.
    fn to_csv(&self, path: &str) -> PyResult<()> {
        self.inner
            .write_csv_path(Path::new(path), None)
            .map_err(to_py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn group_count(&self) -> u32 {
        self.inner.group_count()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner
            .columns()
            .iter()
            .map(|c| c.name.clone())
            .collect()
    }

    fn p_star(&self) -> PyResult<Vec<f64>> {
        self.inner.p_star().map_err(to_py_err)
    }

    fn y_star(&self) -> PyResult<Vec<u8>> {
        self.inner.y_star().map_err(to_py_err)
    }

    fn groups(&self) -> Vec<u32> {
        self.inner.instances().iter().map(|r| r.group).collect()
    }

    /// Fair labels at the threshold: 1 exactly when p_star > tau.
    fn fair_labels(&self, tau: f64) -> PyResult<Vec<u8>> {
        Ok(self.inner.fair_labels(tau).map_err(to_py_err)?.f_star)
    }

    /// Resample the Bernoulli labels under a new seed.
    fn sample_labels(&self, seed: u64) -> PyResult<Self> {
        Ok(PyDataset {
            inner: self.inner.sample_y_star(seed).map_err(to_py_err)?,
        })
    }

    /// Drop named features (one-hot blocks by their source name).
    fn drop_features(&self, names: Vec<String>) -> PyResult<Self> {
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Ok(PyDataset {
            inner: self.inner.drop_features(&refs).map_err(to_py_err)?,
        })
    }
}

fn decisions_from(bits: Vec<u8>) -> PyResult<DecisionVector> {
    if bits.iter().any(|&b| b > 1) {
        return Err(PyValueError::new_err("decisions must be 0 or 1"));
    }
    Ok(DecisionVector::new(bits))
}

/// The accuracy-maximizing decisions `1{p_star >= 0.5}`.
#[pyfunction]
fn bayes_decisions(ds: &PyDataset) -> PyResult<Vec<u8>> {
    Ok(DecisionVector::bayes(&ds.inner)
        .map_err(to_py_err)?
        .as_slice()
        .to_vec())
}

/// Full metrics report for the decisions at fairness threshold tau, as a
/// flat dict (values rounded to 6 decimals, absent values None).
#[pyfunction]
fn metrics_report<'py>(
    py: Python<'py>,
    ds: &PyDataset,
    decisions: Vec<u8>,
    tau: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let c = decisions_from(decisions)?;
    let fl = ds.inner.fair_labels(tau).map_err(to_py_err)?;
    let report = MetricsReport::compute(&ds.inner, &c, &fl).map_err(to_py_err)?;
    let out = PyDict::new(py);
    for (key, value) in report.fields() {
        out.set_item(key, value.map(metrics::round6))?;
    }
    Ok(out)
}

/// Check the accuracy/infra-marginality bound for the decisions.
#[pyfunction]
fn check_bound<'py>(
    py: Python<'py>,
    ds: &PyDataset,
    decisions: Vec<u8>,
    tau: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let c = decisions_from(decisions)?;
    let fl = ds.inner.fair_labels(tau).map_err(to_py_err)?;
    let report = theory::check_bound(&ds.inner, &fl, &c).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("alpha", report.alpha)?;
    out.set_item("eta", report.eta)?;
    out.set_item("delta", report.delta)?;
    out.set_item("lower", report.lower)?;
    out.set_item("upper", report.upper)?;
    out.set_item("holds", report.holds)?;
    out.set_item("slack", report.slack)?;
    Ok(out)
}

/// Maximize expected accuracy subject to an infra-marginality budget.
/// Returns the solution summary plus the decision vector.
#[pyfunction]
fn solve_constrained<'py>(
    py: Python<'py>,
    ds: &PyDataset,
    tau: f64,
    eta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let fl = ds.inner.fair_labels(tau).map_err(to_py_err)?;
    let sol = optimize::solve_dual(&ds.inner, &fl, eta).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("lambda_star", sol.lambda_star)?;
    out.set_item("accuracy", sol.accuracy)?;
    out.set_item("eta_budget", sol.eta_budget)?;
    out.set_item("eta_achieved", sol.eta_achieved)?;
    out.set_item("low_threshold", sol.low_threshold)?;
    out.set_item("high_threshold", sol.high_threshold)?;
    out.set_item("binding", sol.binding)?;
    out.set_item("flipped_boundary_points", sol.flipped_boundary_points)?;
    out.set_item("decisions", sol.classifier.as_slice().to_vec())?;
    Ok(out)
}

/// Exhaustive oracle for small datasets (n <= 20): the feasible
/// accuracy maximizer and its accuracy.
#[pyfunction]
fn brute_force_optimum(ds: &PyDataset, tau: f64, eta: f64) -> PyResult<(Vec<u8>, f64)> {
    let fl = ds.inner.fair_labels(tau).map_err(to_py_err)?;
    let (c, acc) = optimize::brute_force_optimum(&ds.inner, &fl, eta).map_err(to_py_err)?;
    Ok((c.as_slice().to_vec(), acc))
}

/// Sweep the group-fairness trade-off weight. Returns one dict per
/// gamma with the plottable curve columns.
#[pyfunction]
#[pyo3(signature = (ds, metric, gammas, tau, grid = 201))]
fn tradeoff_sweep<'py>(
    py: Python<'py>,
    ds: &PyDataset,
    metric: &str,
    gammas: Vec<f64>,
    tau: f64,
    grid: usize,
) -> PyResult<Bound<'py, PyList>> {
    let metric: UnfairnessMetric = metric.parse().map_err(to_py_err)?;
    let benchmark = ds.inner.fair_labels(tau).map_err(to_py_err)?;
    let cfg = TrainConfig {
        grid,
        ..TrainConfig::default()
    };
    let curve =
        model::sweep_tradeoff(&ds.inner, &benchmark, metric, &gammas, &cfg).map_err(to_py_err)?;
    let rows = PyList::empty(py);
    for p in &curve.points {
        let row = PyDict::new(py);
        row.set_item("gamma", p.gamma)?;
        row.set_item("error", p.error)?;
        row.set_item("eta", p.eta)?;
        row.set_item("unfairness", p.unfairness)?;
        row.set_item("group_error", p.group_error.to_vec())?;
        row.set_item("group_eta", p.group_eta.to_vec())?;
        row.set_item("group_sr", p.group_sr.to_vec())?;
        row.set_item("group_fdr", p.group_fdr.to_vec())?;
        row.set_item("theta", p.theta.to_vec())?;
        rows.append(row)?;
    }
    Ok(rows)
}

#[pymodule]
#[pyo3(name = "inframargin")]
fn extension(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(bayes_decisions, m)?)?;
    m.add_function(wrap_pyfunction!(metrics_report, m)?)?;
    m.add_function(wrap_pyfunction!(check_bound, m)?)?;
    m.add_function(wrap_pyfunction!(solve_constrained, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(tradeoff_sweep, m)?)?;
    Ok(())
}
