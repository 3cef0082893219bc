//! Python bindings. Matrices cross the boundary as lists of rows.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use wsregen_core::chain::{self, Ar1Kernel, ChainSpec, SplitChainTrace, Tour, TourSequence, TwoStateKernel};
use wsregen_core::diagnostics::{self, DiagnosticsReport};
use wsregen_core::estimators::{self, BatchSchedule, Centering};
use wsregen_core::probit;
use wsregen_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Input(_) | Error::Parse { .. } | Error::Json(_) | Error::UnsupportedOracle(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(PyValueError::new_err("matrix must be non-empty"));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    PyModule::import(py, "json")?.call_method1("loads", (value.to_string(),))
}

fn centering(name: &str) -> PyResult<Centering> {
    match name {
        "ratio" => Ok(Centering::Ratio),
        "tour-mean" | "tour_mean" => Ok(Centering::TourMean),
        _ => Err(PyValueError::new_err(format!("unknown centering {name:?}"))),
    }
}

/// Output of a split-chain run.
#[pyclass(name = "Trace", module = "wsregen", frozen)]
struct PyTrace {
    inner: SplitChainTrace,
}

#[pymethods]
impl PyTrace {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn lag(&self) -> usize {
        self.inner.lag()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    fn states(&self) -> Vec<Vec<f64>> {
        self.inner.states().map(<[f64]>::to_vec).collect()
    }

    fn bells(&self) -> Vec<bool> {
        self.inner.bells().to_vec()
    }

    /// 1-based regeneration times.
    fn regeneration_times(&self) -> Vec<usize> {
        self.inner.regeneration_times()
    }

    fn count_regenerations(&self, n: usize) -> PyResult<usize> {
        chain::count_regenerations(&self.inner, n).map_err(to_py)
    }

    /// Tours of the identity function.
    fn tours(&self) -> PyResult<PyTours> {
        chain::extract_identity_tours(&self.inner)
            .map(|inner| PyTours { inner })
            .map_err(to_py)
    }

    fn batch_means(&self, nu: f64) -> PyResult<Vec<Vec<f64>>> {
        estimators::batch_means(&self.inner.sample_matrix(), &BatchSchedule::power(nu))
            .map(|e| rows(&e.matrix))
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(len={}, dim={}, lag={}, seed={})",
            self.inner.len(),
            self.inner.dim(),
            self.inner.lag(),
            self.inner.seed()
        )
    }
}

/// Tour sums `Z_k` and lengths `tau_k`.
#[pyclass(name = "Tours", module = "wsregen", frozen)]
struct PyTours {
    inner: TourSequence,
}

#[pymethods]
impl PyTours {
    #[new]
    #[pyo3(signature = (z, tau, residual_len = 0))]
    fn new(z: Vec<Vec<f64>>, tau: Vec<usize>, residual_len: usize) -> PyResult<Self> {
        if z.len() != tau.len() {
            return Err(PyValueError::new_err("z and tau differ in length"));
        }
        let dim = z.first().map_or(1, Vec::len);
        let tours = z.into_iter().zip(tau).map(|(z, tau)| Tour { z, tau }).collect();
        TourSequence::new(dim, tours, residual_len)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn residual_len(&self) -> usize {
        self.inner.residual_len
    }

    #[getter]
    fn z(&self) -> Vec<Vec<f64>> {
        self.inner.tours.iter().map(|t| t.z.clone()).collect()
    }

    #[getter]
    fn tau(&self) -> Vec<usize> {
        self.inner.tours.iter().map(|t| t.tau).collect()
    }

    /// `sum Z / sum tau`.
    fn mean(&self) -> PyResult<Vec<f64>> {
        estimators::regen_mean(&self.inner).map_err(to_py)
    }

    fn mu_hat(&self) -> PyResult<f64> {
        estimators::regen_mu_hat(&self.inner).map_err(to_py)
    }

    #[pyo3(signature = (centering = "ratio"))]
    fn sigma_z(&self, centering: &str) -> PyResult<Vec<Vec<f64>>> {
        estimators::regen_sigma_z_hat_with(&self.inner, self::centering(centering)?)
            .map(|m| rows(&m))
            .map_err(to_py)
    }

    #[pyo3(signature = (centering = "ratio", psd = false))]
    fn sigma_f(&self, centering: &str, psd: bool) -> PyResult<Vec<Vec<f64>>> {
        let mut est = estimators::regen_sigma_f_hat_with(&self.inner, self::centering(centering)?).map_err(to_py)?;
        if psd {
            est = est.into_psd().map_err(to_py)?;
        }
        Ok(rows(&est.matrix))
    }

    /// One-dependence check and, with `mean`, the regenerative mean identity.
    #[pyo3(signature = (mean = None))]
    fn diagnose<'py>(&self, py: Python<'py>, mean: Option<Vec<f64>>) -> PyResult<Bound<'py, PyAny>> {
        let mut report = DiagnosticsReport::default();
        if let Some(mean) = mean {
            report.push(diagnostics::check_regen_mean_identity(&self.inner, &mean, None).map_err(to_py)?);
        }
        report.push(diagnostics::check_one_dependence(&self.inner));
        let mut v = report.to_json();
        v["passed"] = report.passed().into();
        json_to_py(py, &v)
    }

    fn __repr__(&self) -> String {
        format!(
            "Tours(len={}, dim={}, residual_len={})",
            self.inner.len(),
            self.inner.dim,
            self.inner.residual_len
        )
    }
}

#[pyclass(name = "MinorizationConfig", module = "wsregen", frozen)]
struct PyMinorizationConfig {
    inner: probit::MinorizationConfig,
}

#[pymethods]
impl PyMinorizationConfig {
    #[new]
    fn new(z_star: Vec<f64>, bounds: Vec<(f64, f64)>) -> PyResult<Self> {
        probit::MinorizationConfig::new(z_star, bounds)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn z_star(&self) -> Vec<f64> {
        self.inner.z_star.clone()
    }

    #[getter]
    fn bounds(&self) -> Vec<(f64, f64)> {
        self.inner.bounds.clone()
    }
}

#[pyclass(name = "RegenExperiment", module = "wsregen", frozen)]
struct PyRegenExperiment {
    inner: probit::RegenExperiment,
}

#[pymethods]
impl PyRegenExperiment {
    #[getter]
    fn regen_fraction(&self) -> f64 {
        self.inner.regen_fraction()
    }

    #[getter]
    fn regenerations(&self) -> usize {
        self.inner.regenerations
    }

    #[getter]
    fn windows(&self) -> usize {
        self.inner.records.len()
    }

    #[getter]
    fn clamped(&self) -> usize {
        self.inner.clamped
    }

    #[getter]
    fn max_eta(&self) -> f64 {
        self.inner.max_eta()
    }

    /// `(i, eta_i, bell)` per evaluated window.
    fn records(&self) -> Vec<(usize, f64, bool)> {
        self.inner.records.iter().map(|r| (r.step, r.eta, r.bell)).collect()
    }

    fn tours(&self) -> PyTours {
        PyTours {
            inner: self.inner.tours.clone(),
        }
    }
}

/// Albert–Chib probit sampler with a random-scan probability `p_scan`.
#[pyclass(name = "ProbitModel", module = "wsregen", frozen)]
struct PyProbitModel {
    inner: probit::ProbitModel,
}

#[pymethods]
impl PyProbitModel {
    #[new]
    #[pyo3(signature = (x, y, p_scan = 0.5))]
    fn new(x: Vec<Vec<f64>>, y: Vec<bool>, p_scan: f64) -> PyResult<Self> {
        probit::ProbitModel::new(from_rows(&x)?, y, p_scan)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// The bundled synthetic design (`n = 50`, `p = 2`).
    #[staticmethod]
    #[pyo3(signature = (p_scan = 0.5))]
    fn bundled(p_scan: f64) -> PyResult<Self> {
        let (x, y) = wsregen_core::cli::bundled_design();
        probit::ProbitModel::new(x, y, p_scan)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn p_scan(&self) -> f64 {
        self.inner.p_scan()
    }

    fn hat(&self) -> Vec<Vec<f64>> {
        rows(self.inner.hat())
    }

    #[pyo3(signature = (iters = 10_000, quantile = 0.25, seed = 0))]
    fn pilot_tune(&self, iters: usize, quantile: f64, seed: u64) -> PyResult<PyMinorizationConfig> {
        probit::pilot_tune(&self.inner, iters, quantile, seed)
            .map(|inner| PyMinorizationConfig { inner })
            .map_err(to_py)
    }

    fn regen_experiment(
        &self,
        py: Python<'_>,
        config: &PyMinorizationConfig,
        steps: usize,
        seed: u64,
    ) -> PyResult<PyRegenExperiment> {
        let (model, cfg) = (&self.inner, &config.inner);
        py.detach(|| probit::run_regen_experiment(model, cfg, steps, seed))
            .map(|inner| PyRegenExperiment { inner })
            .map_err(to_py)
    }
}

/// Runs a fixture split chain: `"two-state"`, `"two-state-unsplit"` or `"ar1"`.
#[pyfunction]
#[pyo3(signature = (fixture, n, seed, a = 0.2, b = 0.3, lag = 1, rho = 0.5, noise_sd = 1.0, half_width = 1.0))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    fixture: &str,
    n: usize,
    seed: u64,
    a: f64,
    b: f64,
    lag: usize,
    rho: f64,
    noise_sd: f64,
    half_width: f64,
) -> PyResult<PyTrace> {
    let trace = match fixture {
        "two-state" => {
            let k = TwoStateKernel::new(a, b, lag).map_err(to_py)?;
            py.detach(|| chain::run_split_chain(&k, n, seed))
        }
        "two-state-unsplit" => {
            let k = TwoStateKernel::without_minorization(a, b).map_err(to_py)?;
            py.detach(|| chain::run_split_chain(&k, n, seed))
        }
        "ar1" => {
            let k = Ar1Kernel::new(rho, noise_sd, half_width).map_err(to_py)?;
            py.detach(|| chain::run_split_chain(&k, n, seed))
        }
        other => return Err(PyValueError::new_err(format!("unknown fixture {other:?}"))),
    };
    trace.map(|inner| PyTrace { inner }).map_err(to_py)
}

/// Closed-form `Sigma_f` of the identity function for a fixture chain.
#[pyfunction]
#[pyo3(signature = (fixture, a = 0.2, b = 0.3, rho = 0.5, noise_sd = 1.0))]
fn oracle_sigma_f(fixture: &str, a: f64, b: f64, rho: f64, noise_sd: f64) -> PyResult<f64> {
    let spec = match fixture {
        "two-state" | "two-state-unsplit" => ChainSpec::TwoState { a, b },
        "ar1" => ChainSpec::Ar1 { rho, noise_sd },
        other => return Err(PyValueError::new_err(format!("unknown fixture {other:?}"))),
    };
    spec.oracle_sigma_f().map(|m| m[(0, 0)]).map_err(to_py)
}

/// Batch-means estimate from samples given as rows, `b_n = floor(n^nu)`.
#[pyfunction]
#[pyo3(signature = (samples, nu = 0.5))]
fn batch_means(samples: Vec<Vec<f64>>, nu: f64) -> PyResult<Vec<Vec<f64>>> {
    estimators::batch_means(&from_rows(&samples)?, &BatchSchedule::power(nu))
        .map(|e| rows(&e.matrix))
        .map_err(to_py)
}

#[pyfunction]
fn check_batch_schedule<'py>(py: Python<'py>, nu: f64) -> PyResult<Bound<'py, PyAny>> {
    let check = estimators::check_batch_schedule(&BatchSchedule::power(nu));
    let mut v = serde_json::to_value(&check).map_err(|e| to_py(e.into()))?;
    v["passed"] = check.passed().into();
    json_to_py(py, &v)
}

#[pyfunction]
#[pyo3(signature = (delta, p, geometric = false))]
fn sip_rate_exponent<'py>(py: Python<'py>, delta: f64, p: f64, geometric: bool) -> PyResult<Bound<'py, PyAny>> {
    let report = estimators::sip_rate_exponent(delta, p, geometric).map_err(to_py)?;
    json_to_py(py, &serde_json::to_value(report).map_err(|e| to_py(e.into()))?)
}

#[pyfunction]
fn psd_project(matrix: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    estimators::psd_project(&from_rows(&matrix)?)
        .map(|m| rows(&m))
        .map_err(to_py)
}

#[pymodule]
fn wsregen(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrace>()?;
    m.add_class::<PyTours>()?;
    m.add_class::<PyProbitModel>()?;
    m.add_class::<PyMinorizationConfig>()?;
    m.add_class::<PyRegenExperiment>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_sigma_f, m)?)?;
    m.add_function(wrap_pyfunction!(batch_means, m)?)?;
    m.add_function(wrap_pyfunction!(check_batch_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(sip_rate_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(psd_project, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(from_rows(&rows(&m)).unwrap(), m);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(from_rows(&[]).is_err());
    }

    #[test]
    fn centering_names() {
        assert_eq!(centering("ratio").unwrap(), Centering::Ratio);
        assert_eq!(centering("tour-mean").unwrap(), Centering::TourMean);
        assert!(centering("mean").is_err());
    }
}
