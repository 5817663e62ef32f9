//! Python bindings. Inputs are plain lists; matrices are lists of rows.

use gpnam_core::data::{synth_additive, Dataset};
use gpnam_core::model::{self, GpnamModel, Task};
use gpnam_core::rff::{BasisMode, FeatureBasis};
use gpnam_core::solvers::FitConfig;
use gpnam_core::train::{Bandwidth, TrainConfig};
use gpnam_core::{metrics, Error, Matrix};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) => PyValueError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<Matrix> {
    Matrix::from_rows(rows).map_err(to_py)
}

/// Shared random Fourier feature sample set.
#[pyclass(name = "Basis", module = "gpnam", frozen)]
struct PyBasis {
    inner: FeatureBasis,
}

#[pymethods]
impl PyBasis {
    #[new]
    #[pyo3(signature = (size, mode = "grid", seed = 0))]
    fn new(size: usize, mode: &str, seed: u64) -> PyResult<Self> {
        let mode: BasisMode = mode.parse().map_err(to_py)?;
        Ok(Self {
            inner: FeatureBasis::build(size, mode, seed).map_err(to_py)?,
        })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode().to_string()
    }

    /// φ(x) for bandwidth `b`.
    fn feature_map(&self, x: f64, b: f64) -> PyResult<Vec<f64>> {
        self.inner.feature_map(x, b).map_err(to_py)
    }

    fn approx_kernel(&self, x: f64, x_prime: f64, b: f64) -> PyResult<f64> {
        self.inner.approx_kernel(x, x_prime, b).map_err(to_py)
    }
}

/// Trained additive model.
#[pyclass(name = "Model", module = "gpnam", frozen)]
struct PyModel {
    inner: GpnamModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: model::load(path).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: GpnamModel::from_json(text).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        model::save(&self.inner, path).map_err(to_py)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    /// Regression outputs or class-1 probabilities, one per row.
    fn predict(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        self.inner.predict(&matrix(&x)?).map_err(to_py)
    }

    /// `(grid, values)` of feature `i`'s shape function.
    #[pyo3(signature = (i, grid, centered = true))]
    fn shape_function(&self, i: usize, grid: Vec<f64>, centered: bool) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let t = self.inner.shape_function(i, &grid, centered).map_err(to_py)?;
        Ok((t.grid, t.values))
    }

    #[getter]
    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names().to_vec()
    }

    #[getter]
    fn task(&self) -> String {
        self.inner.task().to_string()
    }

    #[getter]
    fn bias(&self) -> f64 {
        self.inner.w0()
    }

    #[getter]
    fn bandwidth_scale(&self) -> f64 {
        self.inner.bandwidth_scale()
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(task={}, features={}, params={})",
            self.inner.task(),
            self.inner.n_features(),
            self.inner.param_count()
        )
    }
}

#[pyfunction]
fn rbf_kernel(x: Vec<f64>, x_prime: Vec<f64>, b: f64) -> PyResult<f64> {
    gpnam_core::rff::rbf_kernel(&x, &x_prime, b).map_err(to_py)
}

#[pyfunction]
fn auc(scores: Vec<f64>, labels: Vec<f64>) -> PyResult<f64> {
    metrics::auc(&scores, &labels).map_err(to_py)
}

#[pyfunction]
fn rmse(pred: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    metrics::rmse(&pred, &y).map_err(to_py)
}

/// Synthetic additive regression data: `(rows, targets)`.
#[pyfunction]
#[pyo3(signature = (n, d, noise = 0.1, seed = 0))]
fn synth(n: usize, d: usize, noise: f64, seed: u64) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let ds = synth_additive(n, d, noise, seed).map_err(to_py)?.dataset;
    Ok((ds.x.rows().map(<[f64]>::to_vec).collect(), ds.y))
}

/// `(split, metric, value)` records.
type MetricRecords = Vec<(String, String, f64)>;

/// Trains on `(x, y)` and returns the model plus `(split, metric, value)`
/// records for the validation and test parts. `bandwidth` is a number or
/// `"auto"`.
#[pyfunction]
#[pyo3(signature = (
    x, y, task = "reg", feature_names = None, size = 100, mode = "grid", seed = 0,
    bandwidth = "1", lam = 1.0, split = (0.8, 0.1, 0.1)
))]
#[allow(clippy::too_many_arguments)]
fn train(
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    task: &str,
    feature_names: Option<Vec<String>>,
    size: usize,
    mode: &str,
    seed: u64,
    bandwidth: &str,
    lam: f64,
    split: (f64, f64, f64),
) -> PyResult<(PyModel, MetricRecords)> {
    let task: Task = task.parse().map_err(to_py)?;
    let x = matrix(&x)?;
    let names = feature_names.unwrap_or_else(|| (1..=x.ncols()).map(|i| format!("x{i}")).collect());
    let ds = Dataset::new(x, y, names, task).map_err(to_py)?;
    let bandwidth: Bandwidth = bandwidth.parse().map_err(to_py)?;
    let cfg = TrainConfig {
        basis_size: size,
        mode: mode.parse().map_err(to_py)?,
        seed,
        bandwidth,
        split: [split.0, split.1, split.2],
        split_seed: seed,
        interactions: Vec::new(),
        fit: FitConfig {
            lambda: lam,
            seed,
            ..FitConfig::default()
        },
    };
    let out = gpnam_core::train::train(&ds, &cfg).map_err(to_py)?;
    let records = [("validation", &out.validation), ("test", &out.test)]
        .into_iter()
        .flat_map(|(part, list)| list.iter().map(move |e| (part.to_string(), e.metric.to_string(), e.value)))
        .collect();
    Ok((PyModel { inner: out.model }, records))
}

#[pymodule]
fn gpnam(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBasis>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(rbf_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    Ok(())
}
