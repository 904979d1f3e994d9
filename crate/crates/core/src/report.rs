//! JSON fit summary.

use serde::Serialize;

use crate::design::{back_transform, Fit};
use crate::error::Result;
use crate::shrinkage::{
    grr_estimate, ml_components, qm_search, MLComponentFit, PathSpec, QGrid, QMSolution,
};
use crate::trace::ResolvedPath;

#[derive(Debug, Clone, Serialize)]
pub struct Coefficients {
    pub standardized: Vec<f64>,
    pub raw: Vec<f64>,
    pub intercept: f64,
}

impl Coefficients {
    fn new(fit: &Fit, standardized: Vec<f64>) -> Self {
        let (raw, intercept) = back_transform(&standardized, &fit.design);
        Self {
            standardized,
            raw,
            intercept,
        }
    }
}

/// ML point of the selected path.
#[derive(Debug, Clone, Serialize)]
pub struct PathPoint {
    pub path: &'static str,
    pub q_star: Option<f64>,
    pub k_star: Option<f64>,
    pub m_ml: f64,
    pub chisq: Option<f64>,
    pub deltas: Vec<f64>,
    pub coefficients: Coefficients,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub n: usize,
    pub p: usize,
    pub predictors: Vec<String>,
    pub standardize_y: bool,
    pub lambdas: Vec<f64>,
    pub rho: Vec<f64>,
    pub r2: f64,
    pub s2: f64,
    pub tau: Vec<f64>,
    pub ols: Coefficients,
    pub ml_components: MLComponentFit,
    /// Absent when the response carries no signal (R² = 0).
    pub qm: Option<QMSolution>,
    pub selected: PathPoint,
}

impl FitReport {
    pub fn new(fit: &Fit, path: &PathSpec, qgrid: &QGrid) -> Result<Self> {
        let (n, p) = (fit.n(), fit.p());
        let lambdas = fit.lambdas();
        let ml = ml_components(&fit.comps, n)?;
        let qm = match qm_search(&fit.comps, lambdas, n, qgrid) {
            Ok(s) => Some(s),
            Err(crate::Error::TerminusOptimal) => None,
            Err(e) => return Err(e),
        };
        let resolved = ResolvedPath::new(&path.kind, &fit.comps, lambdas, n)?;
        let delta = resolved.deltas_at(resolved.m_ml, lambdas)?;
        let (q_star, k_star, chisq) = match &resolved.summary {
            crate::trace::PathSummary::Qm(s) => (Some(s.q_star), Some(s.k_star), Some(s.chisq)),
            crate::trace::PathSummary::Efficient(_) => (None, None, Some(0.0)),
        };
        let selected = PathPoint {
            path: path.kind.label(),
            q_star,
            k_star,
            m_ml: resolved.m_ml,
            chisq,
            coefficients: Coefficients::new(fit, grr_estimate(&fit.decomp, &fit.comps, &delta)),
            deltas: delta.deltas,
        };
        debug_assert_eq!(selected.deltas.len(), p);
        Ok(Self {
            n,
            p,
            predictors: fit.design.predictor_names.clone(),
            standardize_y: fit.design.standardize_y,
            lambdas: lambdas.to_vec(),
            rho: fit.comps.rho.clone(),
            r2: fit.comps.r2,
            s2: fit.comps.s2,
            tau: fit.comps.tau.clone(),
            ols: Coefficients::new(fit, fit.ols()),
            ml_components: ml,
            qm,
            selected,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
