//! Python bindings (`pywqisa`) for the wqisa library.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wqisa::inference::{coefficient_covariance, residual_sigma_estimate, se_band, variance_at};
use wqisa::io::{
    gen_synthetic, load_cloud, save_cloud, CloudFormat, SyntheticKind, SyntheticParams,
};
use wqisa::metrics::{directed_hausdorff_scaled, dispersion, jaccard_points};
use wqisa::{
    CoefficientCovariance, CvParameter, CvSetup, EmptySupportPolicy, FitPolicy, NoiseModel,
    TensorSplineSpace, WeightSpec, WqisaError, WqisaModel,
};

fn py_err(e: WqisaError) -> PyErr {
    PyValueError::new_err(format!("[{}] {e}", e.kind()))
}

fn parse<T: std::str::FromStr<Err = WqisaError>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

/// A point cloud; each row is `(x_1, ..., x_d, y)`.
#[pyclass(name = "PointCloud", module = "pywqisa", frozen)]
pub struct PyPointCloud {
    inner: wqisa::PointCloud,
}

#[pymethods]
impl PyPointCloud {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = wqisa::PointCloud::from_rows(&rows).map_err(py_err)?;
        Ok(PyPointCloud { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, format = "auto"))]
    fn load(path: &str, format: &str) -> PyResult<Self> {
        let inner = load_cloud(path, parse::<CloudFormat>(format)?).map_err(py_err)?;
        Ok(PyPointCloud { inner })
    }

    #[pyo3(signature = (path, format = "xyz"))]
    fn save(&self, path: &str, format: &str) -> PyResult<()> {
        save_cloud(path, &self.inner, parse::<CloudFormat>(format)?).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len())
            .map(|i| self.inner.record(i))
            .collect()
    }

    fn responses(&self) -> Vec<f64> {
        self.inner.responses().to_vec()
    }

    fn bbox(&self) -> Vec<(f64, f64)> {
        self.inner.bbox()
    }

    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    fn __repr__(&self) -> String {
        format!(
            "PointCloud(len={}, dim={})",
            self.inner.len(),
            self.inner.dim()
        )
    }
}

/// A fitted wQISA spline.
#[pyclass(name = "Model", module = "pywqisa", frozen)]
pub struct PyModel {
    inner: WqisaModel,
}

fn covariance(
    model: &WqisaModel,
    cloud: &wqisa::PointCloud,
    sigma: Option<f64>,
) -> PyResult<CoefficientCovariance> {
    let sigma = match sigma {
        Some(s) => s,
        None => residual_sigma_estimate(model, cloud).map_err(py_err)?,
    };
    let noise = NoiseModel::new(sigma).map_err(py_err)?;
    coefficient_covariance(cloud, model.space(), &model.weight, model.policy, noise).map_err(py_err)
}

#[pymethods]
impl PyModel {
    fn evaluate(&self, u: Vec<f64>) -> PyResult<f64> {
        self.inner.evaluate(&u).map_err(py_err)
    }

    fn evaluate_many(&self, points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        points
            .iter()
            .map(|u| self.inner.evaluate(u).map_err(py_err))
            .collect()
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients().to_vec()
    }

    #[getter]
    fn effective_count(&self) -> usize {
        self.inner.effective_count
    }

    #[getter]
    fn domain(&self) -> Vec<(f64, f64)> {
        self.inner.space().domain()
    }

    /// Pointwise variance at each point; `sigma=None` uses the residual estimate.
    #[pyo3(signature = (cloud, points, sigma = None))]
    fn variance(
        &self,
        cloud: &PyPointCloud,
        points: Vec<Vec<f64>>,
        sigma: Option<f64>,
    ) -> PyResult<Vec<f64>> {
        let cov = covariance(&self.inner, &cloud.inner, sigma)?;
        points
            .iter()
            .map(|u| variance_at(&self.inner, &cov, u).map_err(py_err))
            .collect()
    }

    /// `(lo, hi)` standard-error band at each point.
    #[pyo3(signature = (cloud, points, sigma = None, alpha = 0.05))]
    fn band(
        &self,
        cloud: &PyPointCloud,
        points: Vec<Vec<f64>>,
        sigma: Option<f64>,
        alpha: f64,
    ) -> PyResult<Vec<(f64, f64)>> {
        let cov = covariance(&self.inner, &cloud.inner, sigma)?;
        points
            .iter()
            .map(|u| se_band(&self.inner, &cov, u, alpha).map_err(py_err))
            .collect()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serializable model")
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyModel { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(shape={:?}, weight={})",
            self.inner.space().shape(),
            self.inner.weight
        )
    }
}

fn domain_or_bbox(cloud: &wqisa::PointCloud, domain: Option<Vec<(f64, f64)>>) -> Vec<(f64, f64)> {
    domain.unwrap_or_else(|| cloud.bbox())
}

fn broadcast(v: Vec<usize>, d: usize) -> Vec<usize> {
    if v.len() == 1 {
        vec![v[0]; d]
    } else {
        v
    }
}

/// Fits a cloud; `weight` uses the `family:key=value` syntax, e.g. `knn:k=10`.
#[pyfunction]
#[pyo3(signature = (cloud, n, degree = vec![2], weight = "knn:k=10", policy = "error", domain = None, drop_outside = false))]
fn fit(
    cloud: &PyPointCloud,
    n: Vec<usize>,
    degree: Vec<usize>,
    weight: &str,
    policy: &str,
    domain: Option<Vec<(f64, f64)>>,
    drop_outside: bool,
) -> PyResult<PyModel> {
    let d = cloud.inner.dim();
    let space = TensorSplineSpace::uniform(
        &domain_or_bbox(&cloud.inner, domain),
        &broadcast(n, d),
        &broadcast(degree, d),
    )
    .map_err(py_err)?;
    let policy = FitPolicy {
        empty_support: parse::<EmptySupportPolicy>(policy)?,
        drop_outside,
    };
    let weight = parse::<WeightSpec>(weight)?;
    let inner = wqisa::fit(&cloud.inner, &space, &weight, policy).map_err(py_err)?;
    Ok(PyModel { inner })
}

/// K-fold cross-validation; returns `{"best", "candidates", "scores"}`.
#[pyfunction]
#[pyo3(signature = (cloud, candidates, param = "n", n = vec![10], degree = vec![2], weight = "knn:k=10", folds = 5, repeats = 1, seed = 0, domain = None))]
#[allow(clippy::too_many_arguments)]
fn kfold_cv<'py>(
    py: Python<'py>,
    cloud: &PyPointCloud,
    candidates: Vec<usize>,
    param: &str,
    n: Vec<usize>,
    degree: Vec<usize>,
    weight: &str,
    folds: usize,
    repeats: usize,
    seed: u64,
    domain: Option<Vec<(f64, f64)>>,
) -> PyResult<Bound<'py, PyDict>> {
    let d = cloud.inner.dim();
    let setup = CvSetup {
        degrees: broadcast(degree, d),
        n: broadcast(n, d),
        weight: parse::<WeightSpec>(weight)?,
        policy: FitPolicy::default(),
        domain,
    };
    let param = parse::<CvParameter>(param)?;
    let r = wqisa::kfold_cv(
        &cloud.inner,
        &setup,
        param,
        &candidates,
        folds,
        repeats,
        seed,
    )
    .map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("best", r.best)?;
    out.set_item("candidates", r.grid)?;
    out.set_item("scores", r.scores)?;
    Ok(out)
}

/// Residual statistics of `observed - predicted`.
#[pyfunction(name = "dispersion")]
fn py_dispersion<'py>(
    py: Python<'py>,
    observed: Vec<f64>,
    predicted: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let r = dispersion(&observed, &predicted).map_err(py_err)?;
    let out = PyDict::new(py);
    for (key, value) in [
        ("mse", r.mse),
        ("mae", r.mae),
        ("rmse", r.rmse),
        ("min", r.min),
        ("max", r.max),
        ("mean", r.mean),
        ("median", r.median),
        ("std", r.std),
    ] {
        out.set_item(key, value)?;
    }
    Ok(out)
}

/// Directed Hausdorff distance from `a` to `b` divided by `diameter`.
#[pyfunction]
#[pyo3(signature = (a, b, diameter = 1.0))]
fn directed_hausdorff(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, diameter: f64) -> PyResult<f64> {
    directed_hausdorff_scaled(&a, &b, diameter).map_err(py_err)
}

/// Jaccard index of two point sets after grid snapping.
#[pyfunction]
#[pyo3(signature = (a, b, cell = None))]
fn jaccard(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, cell: Option<f64>) -> PyResult<f64> {
    jaccard_points(&a, &b, cell).map_err(py_err)
}

/// Synthetic 1-D cloud: `sine`, `sine_outliers` or `variable_noise`.
#[pyfunction(name = "gen_synthetic")]
#[pyo3(signature = (kind, n, seed = 0, sigma = 0.3, outlier_fraction = 0.05, outlier_magnitude = 10.0))]
fn py_gen_synthetic(
    kind: &str,
    n: usize,
    seed: u64,
    sigma: f64,
    outlier_fraction: f64,
    outlier_magnitude: f64,
) -> PyResult<PyPointCloud> {
    let params = SyntheticParams {
        sigma,
        outlier_fraction,
        outlier_magnitude,
        ..Default::default()
    };
    let (inner, _) =
        gen_synthetic(parse::<SyntheticKind>(kind)?, n, seed, &params).map_err(py_err)?;
    Ok(PyPointCloud { inner })
}

#[pymodule]
fn pywqisa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPointCloud>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(kfold_cv, m)?)?;
    m.add_function(wrap_pyfunction!(py_dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(directed_hausdorff, m)?)?;
    m.add_function(wrap_pyfunction!(jaccard, m)?)?;
    m.add_function(wrap_pyfunction!(py_gen_synthetic, m)?)?;
    Ok(())
}
