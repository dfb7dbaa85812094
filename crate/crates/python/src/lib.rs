//! Python bindings. Points are passed as sequences of equal-length float
//! sequences; results come back as lists and dicts.

use std::collections::HashMap;

use nystrom_skd as skd;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn to_py(e: skd::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen, name = "GaussianKernel")]
struct PyGaussianKernel {
    inner: skd::GaussianKernel,
}

#[pymethods]
impl PyGaussianKernel {
    #[new]
    fn new(rho: f64) -> PyResult<Self> {
        Ok(Self {
            inner: skd::GaussianKernel::new(rho).map_err(to_py)?,
        })
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho()
    }

    /// `K(x, y)`.
    fn __call__(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        if x.len() != y.len() {
            return Err(PyValueError::new_err("points must have the same dimension"));
        }
        Ok(skd::Kernel::eval(&self.inner, &x, &y))
    }

    /// `{"alpha", "m1", "m2"}` for the squared kernel.
    fn derivative_bounds(&self) -> HashMap<&'static str, f64> {
        let b = skd::Kernel::derivative_bounds(&self.inner);
        HashMap::from([("alpha", b.alpha), ("m1", b.m1), ("m2", b.m2)])
    }

    fn __repr__(&self) -> String {
        format!("GaussianKernel(rho={})", self.inner.rho())
    }
}

#[pyclass(frozen, name = "Dataset")]
struct PyDataset {
    inner: skd::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: skd::Dataset::from_rows(rows).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, has_header = false))]
    fn from_csv(path: std::path::PathBuf, has_header: bool) -> PyResult<Self> {
        Ok(Self {
            inner: skd::data::load_csv(path, has_header).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n_points, seed = 0))]
    fn bigaussian(n_points: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: skd::bigaussian_generate(n_points, seed).map_err(to_py)?,
        })
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.inner.n_points()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn standardize(&self) -> PyResult<Self> {
        Ok(Self {
            inner: skd::data::standardize(&self.inner).map_err(to_py)?,
        })
    }

    fn deduplicate(&self) -> Self {
        Self {
            inner: skd::data::deduplicate(&self.inner),
        }
    }

    /// `n` distinct rows drawn uniformly without replacement.
    #[pyo3(signature = (n, seed = 0))]
    fn sample_initial(&self, n: usize, seed: u64) -> PyResult<PyNystromSample> {
        Ok(PyNystromSample {
            inner: skd::sample_initial(&self.inner, n, seed).map_err(to_py)?,
        })
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    fn __len__(&self) -> usize {
        self.inner.n_points()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n_points={}, dim={})", self.inner.n_points(), self.inner.dim())
    }
}

#[pyclass(frozen, name = "NystromSample")]
struct PyNystromSample {
    inner: skd::NystromSample,
}

#[pymethods]
impl PyNystromSample {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: skd::NystromSample::from_rows(rows).map_err(to_py)?,
        })
    }

    #[getter]
    fn n_landmarks(&self) -> usize {
        self.inner.n_landmarks()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    fn __len__(&self) -> usize {
        self.inner.n_landmarks()
    }

    fn __repr__(&self) -> String {
        format!("NystromSample(n_landmarks={}, dim={})", self.inner.n_landmarks(), self.inner.dim())
    }
}

/// `R(S)`.
#[pyfunction]
fn skd_value(data: &PyDataset, sample: &PyNystromSample, kernel: &PyGaussianKernel) -> PyResult<f64> {
    skd::skd_value(&data.inner, &sample.inner, &kernel.inner).map_err(to_py)
}

/// `∇R(S)` as one row of `d` partials per landmark.
#[pyfunction]
fn skd_gradient(data: &PyDataset, sample: &PyNystromSample, kernel: &PyGaussianKernel) -> PyResult<Vec<Vec<f64>>> {
    let g = skd::skd_gradient(&data.inner, &sample.inner, &kernel.inner).map_err(to_py)?;
    Ok(g.as_slice().chunks(g.dim()).map(<[f64]>::to_vec).collect())
}

/// `{"c0", "c1", "l_const"}` for `n` landmarks.
#[pyfunction]
fn lipschitz_bounds(data: &PyDataset, kernel: &PyGaussianKernel, n: usize) -> PyResult<HashMap<&'static str, f64>> {
    let frob_sq = skd::skd::data_frob_sq(&data.inner, &kernel.inner);
    let b = skd::skd::lipschitz_for(&data.inner, &kernel.inner, n, frob_sq).map_err(to_py)?;
    Ok(HashMap::from([("c0", b.c0), ("c1", b.c1), ("l_const", b.l_const)]))
}

fn estimator_kind(name: &str, batch: Option<usize>, batch_x: Option<usize>, batch_y: Option<usize>) -> PyResult<skd::EstimatorKind> {
    let need = |b: Option<usize>| b.ok_or_else(|| PyValueError::new_err("batch is required for stochastic estimators"));
    let kind = match name {
        "exact" => skd::EstimatorKind::Exact,
        "one_sample" | "one-sample" => skd::EstimatorKind::OneSample { batch_size: need(batch)? },
        "two_sample" | "two-sample" => match (batch_x, batch_y) {
            (Some(batch_x), Some(batch_y)) => skd::EstimatorKind::TwoSample { batch_x, batch_y },
            _ => skd::EstimatorKind::two_sample_split(need(batch)?).map_err(to_py)?,
        },
        other => return Err(PyValueError::new_err(format!("unknown estimator {other:?}"))),
    };
    kind.validate().map_err(to_py)?;
    Ok(kind)
}

/// Runs descent and returns `(final_sample, [(iteration, R), ...])`.
#[pyfunction]
#[pyo3(signature = (data, initial, kernel, step_size, iterations, estimator = "exact", batch = None, batch_x = None, batch_y = None, seed = 0, log_every = 100))]
#[allow(clippy::too_many_arguments)]
fn run_descent(
    py: Python<'_>,
    data: &PyDataset,
    initial: &PyNystromSample,
    kernel: &PyGaussianKernel,
    step_size: f64,
    iterations: usize,
    estimator: &str,
    batch: Option<usize>,
    batch_x: Option<usize>,
    batch_y: Option<usize>,
    seed: u64,
    log_every: usize,
) -> PyResult<(PyNystromSample, Vec<(usize, f64)>)> {
    let kind = estimator_kind(estimator, batch, batch_x, batch_y)?;
    let config = skd::DescentConfig::new(step_size, iterations, kind)
        .with_seed(seed)
        .with_log_every(log_every);
    let out = py
        .detach(|| skd::run_descent(&data.inner, &initial.inner, &kernel.inner, &config))
        .map_err(to_py)?;
    let trace = out.trace.records.iter().map(|r| (r.iteration, r.skd)).collect();
    Ok((PyNystromSample { inner: out.final_sample }, trace))
}

/// Requested metrics as a dict; infinite factors map to `None`.
#[pyfunction]
#[pyo3(signature = (data, sample, kernel, metrics = "all"))]
fn evaluate(
    py: Python<'_>,
    data: &PyDataset,
    sample: &PyNystromSample,
    kernel: &PyGaussianKernel,
    metrics: &str,
) -> PyResult<HashMap<&'static str, Option<f64>>> {
    let set = skd::MetricSet::parse(metrics).map_err(to_py)?;
    let v = py
        .detach(|| skd::NystromEvaluator::new(&data.inner, &kernel.inner).evaluate(&sample.inner, &set))
        .map_err(to_py)?;
    let finite = |x: Option<f64>| x.filter(|f| f.is_finite());
    let entries = [
        ("skd", v.skd),
        ("trace_err", v.trace),
        ("frob_err", v.frobenius),
        ("spec_err", v.spectral),
        ("factor_tr", v.factor_tr),
        ("factor_f", v.factor_f),
        ("factor_sp", v.factor_sp),
    ];
    Ok(entries
        .into_iter()
        .filter(|(_, x)| x.is_some())
        .map(|(k, x)| (k, finite(x)))
        .collect())
}

/// Dense `K̂(S)` as a list of rows.
#[pyfunction]
fn nystrom_matrix(data: &PyDataset, sample: &PyNystromSample, kernel: &PyGaussianKernel) -> PyResult<Vec<Vec<f64>>> {
    let m = skd::nystrom_matrix(&data.inner, &sample.inner, &kernel.inner).map_err(to_py)?;
    Ok((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect())
}

#[pymodule]
#[pyo3(name = "nystrom_skd")]
fn nystrom_skd_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGaussianKernel>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyNystromSample>()?;
    m.add_function(wrap_pyfunction!(skd_value, m)?)?;
    m.add_function(wrap_pyfunction!(skd_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(lipschitz_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(run_descent, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(nystrom_matrix, m)?)?;
    Ok(())
}
