//! Python bindings for the `mlridge` engine.

use std::path::PathBuf;

use mlridge::report::FitReport;
use mlridge::shrinkage::chisq_upper_point;
use mlridge::simulate::{run_mc, Scenario};
use mlridge::trace::{render_csv, render_svg};
use mlridge::{DeltaVector, PathKind, PathSpec, QGrid, StandardizedDesign};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: mlridge::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, body: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (body,))
}

fn grid(qmin: f64, qmax: f64, qstep: f64) -> QGrid {
    QGrid { qmin, qmax, qstep }
}

fn path_kind(path: &str, q: Option<f64>, qgrid: QGrid) -> PyResult<PathKind> {
    Ok(match path {
        "eff" | "efficient" => PathKind::Efficient,
        "qm" => PathKind::Qm { q, grid: qgrid },
        "hk" => PathKind::HoerlKennard,
        "uniform" => PathKind::Uniform,
        other => return Err(PyValueError::new_err(format!("unknown path {other:?}"))),
    })
}

/// Componentwise ML estimate of the MSE-optimal factors.
#[pyclass(name = "MLComponents", module = "mlridge", get_all, frozen)]
pub struct PyMLComponents {
    delta_ml: Vec<f64>,
    gamma_ml: Vec<f64>,
    m_knot: f64,
}

#[pymethods]
impl PyMLComponents {
    /// δ-factors along the efficient path at extent `m`.
    fn path_deltas(&self, m: f64) -> PyResult<Vec<f64>> {
        let fit = mlridge::MLComponentFit {
            delta_ml: self.delta_ml.clone(),
            gamma_ml: self.gamma_ml.clone(),
            m_knot: self.m_knot,
        };
        Ok(mlridge::efficient_path_deltas(m, &fit).map_err(err)?.deltas)
    }

    fn __repr__(&self) -> String {
        format!(
            "MLComponents(m_knot={:.6}, delta_ml={:?})",
            self.m_knot, self.delta_ml
        )
    }
}

/// Best 2-parameter `(q, k)` shrinkage path.
#[pyclass(name = "QMSolution", module = "mlridge", get_all, frozen)]
pub struct PyQMSolution {
    q_star: f64,
    k_star: f64,
    m_star: f64,
    crl_star: f64,
    sigma2_hat: f64,
    nu_hat: f64,
    chisq: f64,
    df: usize,
    chisq_99: Option<f64>,
    deltas: Vec<f64>,
    /// `(q, crl, k, m, chisq)` for every grid point.
    grid: Vec<(f64, f64, f64, f64, f64)>,
}

#[pymethods]
impl PyQMSolution {
    fn __repr__(&self) -> String {
        format!(
            "QMSolution(q_star={}, m_star={:.6}, chisq={:.6})",
            self.q_star, self.m_star, self.chisq
        )
    }
}

/// Shrinkage trace evaluated over an `m` grid.
#[pyclass(name = "Trace", module = "mlridge", frozen)]
pub struct PyTrace {
    inner: mlridge::TraceTable,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn m_grid(&self) -> Vec<f64> {
        self.inner.m_grid.clone()
    }
    #[getter]
    fn m_ml(&self) -> f64 {
        self.inner.m_ml
    }
    #[getter]
    fn coef(&self) -> Vec<Vec<f64>> {
        self.inner.coef.clone()
    }
    #[getter]
    fn rmse(&self) -> Vec<Vec<f64>> {
        self.inner.rmse.clone()
    }
    #[getter]
    fn spat(&self) -> Vec<Vec<f64>> {
        self.inner.spat.clone()
    }
    #[getter]
    fn exev(&self) -> Vec<Vec<f64>> {
        self.inner.exev.clone()
    }
    #[getter]
    fn infd(&self) -> Vec<Vec<f64>> {
        self.inner.infd.clone()
    }
    #[getter]
    fn lrat(&self) -> Vec<f64> {
        self.inner.lrat.clone()
    }

    fn to_csv(&self) -> String {
        render_csv(&self.inner)
    }

    /// SVG for one of `coef`, `rmse`, `spat`, `exev`, `infd`.
    fn to_svg(&self, kind: &str) -> PyResult<String> {
        render_svg(&self.inner, kind.parse().map_err(err)?).map_err(err)
    }
}

/// Standardized fit of a linear model in principal-axis coordinates.
#[pyclass(name = "Fit", module = "mlridge", frozen)]
pub struct PyFit {
    inner: mlridge::Fit,
}

#[pymethods]
impl PyFit {
    /// Fit from predictor rows `x` and response `y`.
    #[new]
    #[pyo3(signature = (x, y, names=None, standardize_y=true))]
    fn new(
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        names: Option<Vec<String>>,
        standardize_y: bool,
    ) -> PyResult<Self> {
        let n = x.len();
        let p = x.first().map_or(0, Vec::len);
        if x.iter().any(|r| r.len() != p) {
            return Err(PyValueError::new_err("rows of x differ in length"));
        }
        let xm = nalgebra::DMatrix::from_fn(n, p, |i, j| x[i][j]);
        let ym = nalgebra::DVector::from_vec(y);
        let design =
            StandardizedDesign::from_matrix(&xm, &ym, true, standardize_y, names).map_err(err)?;
        Ok(Self {
            inner: mlridge::Fit::from_design(design).map_err(err)?,
        })
    }

    /// Fit from a headered CSV file.
    #[staticmethod]
    #[pyo3(signature = (path, response, standardize_y=true))]
    fn from_csv(path: PathBuf, response: &str, standardize_y: bool) -> PyResult<Self> {
        let raw = mlridge::load_csv(path, response).map_err(err)?;
        Ok(Self {
            inner: mlridge::Fit::new(&raw, standardize_y).map_err(err)?,
        })
    }

    /// The bundled 13-row cement heat data.
    #[staticmethod]
    #[pyo3(signature = (standardize_y=true))]
    fn haldport(standardize_y: bool) -> PyResult<Self> {
        let raw = mlridge::data::haldport().map_err(err)?;
        Ok(Self {
            inner: mlridge::Fit::new(&raw, standardize_y).map_err(err)?,
        })
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
    fn predictor_names(&self) -> Vec<String> {
        self.inner.design.predictor_names.clone()
    }
    #[getter]
    fn lambdas(&self) -> Vec<f64> {
        self.inner.lambdas().to_vec()
    }
    #[getter]
    fn axes(&self) -> Vec<Vec<f64>> {
        self.inner
            .decomp
            .g
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
    #[getter]
    fn c(&self) -> Vec<f64> {
        self.inner.comps.c.clone()
    }
    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.inner.comps.rho.clone()
    }
    #[getter]
    fn tau(&self) -> Vec<f64> {
        self.inner.comps.tau.clone()
    }
    #[getter]
    fn r2(&self) -> f64 {
        self.inner.comps.r2
    }
    #[getter]
    fn s2(&self) -> f64 {
        self.inner.comps.s2
    }

    /// OLS coefficients in standardized units.
    fn ols(&self) -> Vec<f64> {
        self.inner.ols()
    }

    /// Shrunken coefficients `GΔc` as `(standardized, raw, intercept)`.
    fn estimate(&self, deltas: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
        let d = DeltaVector::new(deltas).map_err(err)?;
        if d.p() != self.inner.p() {
            return Err(PyValueError::new_err("deltas must have length p"));
        }
        let std = mlridge::grr_estimate(&self.inner.decomp, &self.inner.comps, &d);
        let (raw, b0) = mlridge::back_transform(&std, &self.inner.design);
        Ok((std, raw, b0))
    }

    fn ml_components(&self) -> PyResult<PyMLComponents> {
        let m = mlridge::ml_components(&self.inner.comps, self.inner.n()).map_err(err)?;
        Ok(PyMLComponents {
            delta_ml: m.delta_ml,
            gamma_ml: m.gamma_ml,
            m_knot: m.m_knot,
        })
    }

    #[pyo3(signature = (qmin=-5.0, qmax=5.0, qstep=0.5))]
    fn qm_search(&self, qmin: f64, qmax: f64, qstep: f64) -> PyResult<PyQMSolution> {
        let s = mlridge::qm_search(
            &self.inner.comps,
            self.inner.lambdas(),
            self.inner.n(),
            &grid(qmin, qmax, qstep),
        )
        .map_err(err)?;
        Ok(PyQMSolution {
            q_star: s.q_star,
            k_star: s.k_star,
            m_star: s.m_star,
            crl_star: s.crl_star,
            sigma2_hat: s.sigma2_hat,
            nu_hat: s.nu_hat,
            chisq: s.chisq,
            df: s.df,
            chisq_99: s.chisq_99,
            deltas: s.deltas,
            grid: s
                .qgrid_evals
                .iter()
                .map(|e| (e.q, e.crl, e.k, e.m, e.chisq))
                .collect(),
        })
    }

    /// `(T_hat, diag_clamped)` relative risk estimate for fixed δ-factors.
    fn relative_mse(&self, deltas: Vec<f64>) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
        let d = DeltaVector::new(deltas).map_err(err)?;
        let r = mlridge::relative_mse(&d, &self.inner.comps, self.inner.lambdas(), self.inner.n())
            .map_err(err)?;
        let t = r
            .t_hat
            .row_iter()
            .map(|row| row.iter().copied().collect())
            .collect();
        Ok((t, r.diag_clamped))
    }

    /// Unit inferior direction in β-space, or `None`.
    fn inferior_direction(&self, deltas: Vec<f64>) -> PyResult<Option<Vec<f64>>> {
        let d = DeltaVector::new(deltas).map_err(err)?;
        let l = self.inner.lambdas();
        let r = mlridge::relative_mse(&d, &self.inner.comps, l, self.inner.n()).map_err(err)?;
        Ok(mlridge::inferior_direction(&d, &r, l, &self.inner.decomp.g).direction)
    }

    #[pyo3(signature = (path="eff", steps=20, q=None, qmin=-5.0, qmax=5.0, qstep=0.5))]
    fn trace(
        &self,
        path: &str,
        steps: usize,
        q: Option<f64>,
        qmin: f64,
        qmax: f64,
        qstep: f64,
    ) -> PyResult<PyTrace> {
        let spec = PathSpec::new(path_kind(path, q, grid(qmin, qmax, qstep))?).with_steps(steps);
        let f = &self.inner;
        Ok(PyTrace {
            inner: mlridge::build_trace(&f.design, &f.decomp, &f.comps, &spec).map_err(err)?,
        })
    }

    /// `[(m, -2 log LR)]` along a path.
    #[pyo3(signature = (grid, path="eff", q=None))]
    fn likelihood_profile(
        &self,
        grid: Vec<f64>,
        path: &str,
        q: Option<f64>,
    ) -> PyResult<Vec<(f64, f64)>> {
        let spec = PathSpec::new(path_kind(path, q, QGrid::default())?);
        let f = &self.inner;
        mlridge::likelihood_profile(&f.comps, &f.decomp, f.n(), &spec, &grid).map_err(err)
    }

    /// Full summary as written by the `fit` command.
    #[pyo3(signature = (path="eff", qmin=-5.0, qmax=5.0, qstep=0.5))]
    fn report<'py>(
        &self,
        py: Python<'py>,
        path: &str,
        qmin: f64,
        qmax: f64,
        qstep: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let g = grid(qmin, qmax, qstep);
        let spec = PathSpec::new(path_kind(path, None, g)?);
        let body = FitReport::new(&self.inner, &spec, &g)
            .and_then(|r| r.to_json())
            .map_err(err)?;
        json_to_py(py, &body)
    }
}

#[pyfunction]
#[pyo3(signature = (gamma, lam, sigma))]
fn delta_mse_oracle(gamma: f64, lam: f64, sigma: f64) -> PyResult<f64> {
    mlridge::delta_mse_oracle(gamma, lam, sigma).map_err(err)
}

#[pyfunction]
fn two_param_deltas(k: f64, q: f64, lambdas: Vec<f64>) -> Vec<f64> {
    mlridge::two_param_deltas(k, q, &lambdas).deltas
}

#[pyfunction]
fn crl(q: f64, rho: Vec<f64>, lambdas: Vec<f64>) -> PyResult<f64> {
    mlridge::crl(q, &rho, &lambdas).map_err(err)
}

#[pyfunction]
fn m_extent(deltas: Vec<f64>) -> PyResult<f64> {
    mlridge::m_extent(&deltas).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (df, prob=0.99))]
fn chisq_quantile(df: usize, prob: f64) -> Option<f64> {
    chisq_upper_point(df, prob)
}

/// Runs a Monte-Carlo comparison from a scenario given as a JSON string.
#[pyfunction]
#[pyo3(signature = (scenario, seed=None))]
fn simulate<'py>(
    py: Python<'py>,
    scenario: &str,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut s: Scenario =
        serde_json::from_str(scenario).map_err(|e| PyValueError::new_err(e.to_string()))?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let report = py.detach(|| run_mc(&s)).map_err(err)?;
    let body = serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &body)
}

#[pymodule]
#[pyo3(name = "mlridge")]
fn mlridge_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFit>()?;
    m.add_class::<PyMLComponents>()?;
    m.add_class::<PyQMSolution>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(delta_mse_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(two_param_deltas, m)?)?;
    m.add_function(wrap_pyfunction!(crl, m)?)?;
    m.add_function(wrap_pyfunction!(m_extent, m)?)?;
    m.add_function(wrap_pyfunction!(chisq_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
