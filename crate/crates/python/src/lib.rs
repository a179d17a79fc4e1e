//! Python bindings for the `physact` pipeline.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use physact::dataset::Pattern;
use physact::eval::{self, ClassifierConfig, ConfusionMatrix};
use physact::features::{assemble_features, FeatureConfig};
use physact::pnn::{self, PnnModel};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn feature_config(ar_order: usize, psd_grid: usize, bands: usize, window: Option<usize>) -> FeatureConfig {
    FeatureConfig {
        window,
        ar_order,
        psd_grid,
        bands,
        ..FeatureConfig::default()
    }
}

/// Feature vector of one trial given as a list of equal-length channels.
#[pyfunction]
#[pyo3(signature = (channels, ar_order=4, psd_grid=100, bands=10, window=None))]
fn extract_features(
    channels: Vec<Vec<f64>>,
    ar_order: usize,
    psd_grid: usize,
    bands: usize,
    window: Option<usize>,
) -> PyResult<Vec<f64>> {
    let pattern = Pattern {
        channels,
        label: 1,
        subject_id: 0,
        trial_index: 1,
    };
    let cfg = feature_config(ar_order, psd_grid, bands, window);
    assemble_features(&pattern, &cfg)
        .map(|v| v.values)
        .map_err(value_err)
}

/// Column names matching `extract_features` for `channels` channels.
#[pyfunction]
#[pyo3(signature = (channels=8, bands=10))]
fn feature_names(channels: usize, bands: usize) -> Vec<String> {
    feature_config(4, 100, bands, None).registry(channels).names()
}

fn matrix(rows: Vec<Vec<u64>>) -> PyResult<ConfusionMatrix> {
    ConfusionMatrix::from_rows(rows).map_err(value_err)
}

#[pyfunction]
fn accuracy(confusion: Vec<Vec<u64>>) -> PyResult<f64> {
    eval::accuracy(&matrix(confusion)?).map_err(value_err)
}

#[pyfunction]
fn kappa(confusion: Vec<Vec<u64>>) -> PyResult<f64> {
    eval::kappa(&matrix(confusion)?).map_err(value_err)
}

fn classifier(sigma: Option<f64>) -> ClassifierConfig {
    sigma.map_or_else(ClassifierConfig::default, ClassifierConfig::fixed)
}

/// Stratified k-fold cross-validation. Without `sigma` the kernel width is
/// chosen inside each training fold.
#[pyfunction]
#[pyo3(signature = (x, y, k=10, sigma=None, seed=0))]
fn kfold_cv<'py>(
    py: Python<'py>,
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    k: usize,
    sigma: Option<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .detach(|| eval::kfold_cv(&x, &y, k, &classifier(sigma), seed))
        .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("alpha", r.alpha)?;
    d.set_item("kappa", r.kappa)?;
    d.set_item("confusion", r.confusion.rows().to_vec())?;
    d.set_item("sigmas", r.sigmas)?;
    Ok(d)
}

/// Mean and standard deviation of accuracy and kappa over `runs` seeds.
#[pyfunction]
#[pyo3(signature = (x, y, k=10, runs=10, sigma=None, seed=0))]
fn monte_carlo<'py>(
    py: Python<'py>,
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    k: usize,
    runs: usize,
    sigma: Option<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .detach(|| eval::monte_carlo(&x, &y, k, &classifier(sigma), runs, seed))
        .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("alpha_mean", r.alpha_mean)?;
    d.set_item("alpha_std", r.alpha_std)?;
    d.set_item("kappa_mean", r.kappa_mean)?;
    d.set_item("kappa_std", r.kappa_std)?;
    d.set_item("confusion_sum", r.confusion_sum.rows().to_vec())?;
    Ok(d)
}

/// Forward selection; returns `(feature position, criterion)` pairs with
/// 0-based positions.
#[pyfunction]
#[pyo3(signature = (x, y, k=10, sigma=0.3, seed=0, max_features=60, patience=1))]
#[allow(clippy::too_many_arguments)]
fn sfs(
    py: Python<'_>,
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    k: usize,
    sigma: f64,
    seed: u64,
    max_features: usize,
    patience: usize,
) -> PyResult<Vec<(usize, f64)>> {
    let trace = py
        .detach(|| eval::sfs_pnn(&x, &y, k, sigma, seed, max_features, patience))
        .map_err(value_err)?;
    Ok(trace.steps.iter().map(|s| (s.feature, s.criterion)).collect())
}

#[pyfunction]
#[pyo3(signature = (x, y, grid=None, folds=5, seed=0))]
fn select_sigma(
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    grid: Option<Vec<f64>>,
    folds: usize,
    seed: u64,
) -> PyResult<f64> {
    let grid = grid.unwrap_or_else(|| pnn::DEFAULT_SIGMA_GRID.to_vec());
    pnn::select_sigma(&x, &y, &grid, folds, seed).map_err(value_err)
}

/// A fitted probabilistic neural network.
#[pyclass(name = "Pnn", module = "pyphysact", frozen)]
struct Pnn {
    model: PnnModel,
}

#[pymethods]
impl Pnn {
    #[new]
    fn new(x: Vec<Vec<f64>>, y: Vec<usize>, sigma: f64) -> PyResult<Self> {
        PnnModel::fit(&x, &y, sigma)
            .map(|model| Self { model })
            .map_err(value_err)
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.model.sigma()
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.model.num_classes()
    }

    #[getter]
    fn priors(&self) -> Vec<f64> {
        self.model.priors().to_vec()
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<usize> {
        self.model.predict(&x).map(|p| p.label).map_err(value_err)
    }

    fn predict_proba(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.model.predict(&x).map(|p| p.posterior).map_err(value_err)
    }

    fn predict_batch(&self, xs: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
        self.model
            .predict_batch(&xs)
            .map(|ps| ps.into_iter().map(|p| p.label).collect())
            .map_err(value_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.model.to_json().map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        PnnModel::from_json(text)
            .map(|model| Self { model })
            .map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Pnn(classes={}, dim={}, exemplars={}, sigma={})",
            self.model.num_classes(),
            self.model.dim(),
            self.model.num_exemplars(),
            self.model.sigma()
        )
    }
}

#[pymodule]
fn pyphysact(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Pnn>()?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(feature_names, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(kfold_cv, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(sfs, m)?)?;
    m.add_function(wrap_pyfunction!(select_sigma, m)?)?;
    Ok(())
}
