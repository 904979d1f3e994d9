//! Shrinkage-factor algebra.
//!
//! Every estimator here has the form `β̂(Δ) = G Δ c` with a diagonal `Δ` of
//! δ-factors in `[0, 1]`. The horizontal "extent" coordinate of a path is
//! `m = p - Σδ`, running from OLS at `m = 0` to the zero vector at `m = p`.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::design::{ComponentSummary, SpectralDecomposition};
use crate::error::{Error, Result};

/// Slack allowed when checking `0 <= m <= p` and `0 <= δ <= 1`.
const RANGE_SLACK: f64 = 1e-12;

/// A point on a shrinkage path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaVector {
    pub deltas: Vec<f64>,
    pub m: f64,
}

impl DeltaVector {
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        let m = m_extent(&deltas)?;
        Ok(Self { deltas, m })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            deltas: vec![1.0; p],
            m: 0.0,
        }
    }

    pub fn zero(p: usize) -> Self {
        Self {
            deltas: vec![0.0; p],
            m: p as f64,
        }
    }

    pub fn p(&self) -> usize {
        self.deltas.len()
    }
}

/// MSE-optimal shrinkage factor `γ² / (γ² + σ²/λ)` for one component.
pub fn delta_mse_oracle(gamma: f64, lambda: f64, sigma: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue {lambda} must be > 0"
        )));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma {sigma} must be >= 0"
        )));
    }
    let g2 = gamma * gamma;
    if sigma == 0.0 {
        return if gamma == 0.0 {
            Err(Error::Indeterminate)
        } else {
            Ok(1.0)
        };
    }
    Ok(g2 / (g2 + sigma * sigma / lambda))
}

pub fn grr_estimate(
    decomp: &SpectralDecomposition,
    comps: &ComponentSummary,
    delta: &DeltaVector,
) -> Vec<f64> {
    assert_eq!(
        delta.p(),
        comps.c.len(),
        "delta / component length mismatch"
    );
    let shrunk = DVector::from_iterator(
        delta.p(),
        delta.deltas.iter().zip(&comps.c).map(|(d, c)| d * c),
    );
    (&decomp.g * shrunk).iter().copied().collect()
}

/// Multicollinearity allowance `p - Σδ`.
pub fn m_extent(deltas: &[f64]) -> Result<f64> {
    if let Some(d) = deltas
        .iter()
        .find(|d| !(**d >= -RANGE_SLACK && **d <= 1.0 + RANGE_SLACK))
    {
        return Err(Error::InvalidDelta(format!("{d} outside [0, 1]")));
    }
    Ok(deltas.len() as f64 - deltas.iter().sum::<f64>())
}

/// `δ_j = 1 / (1 + k λ_j^{q-1})`; `k = ∞` is the terminus.
pub fn two_param_deltas(k: f64, q: f64, lambdas: &[f64]) -> DeltaVector {
    assert!(k >= 0.0, "k must be non-negative");
    let p = lambdas.len();
    if k == f64::INFINITY {
        return DeltaVector::zero(p);
    }
    let deltas: Vec<f64> = if q == 1.0 {
        vec![1.0 / (1.0 + k); p]
    } else {
        lambdas
            .iter()
            .map(|l| 1.0 / (1.0 + k * l.powf(q - 1.0)))
            .collect()
    };
    let m = p as f64 - deltas.iter().sum::<f64>();
    DeltaVector { deltas, m }
}

/// Inverts `m(k)` along the `(q, k)` path: the δ-factors whose extent is `m`.
pub fn two_param_at_extent(m: f64, q: f64, lambdas: &[f64]) -> Result<DeltaVector> {
    let p = lambdas.len();
    let pf = p as f64;
    if !(m >= -RANGE_SLACK && m <= pf + RANGE_SLACK) {
        return Err(Error::ExtentOutOfRange { m, p });
    }
    if m <= 0.0 {
        return Ok(DeltaVector::identity(p));
    }
    if m >= pf {
        return Ok(DeltaVector::zero(p));
    }
    if q == 1.0 {
        return Ok(DeltaVector {
            deltas: vec![1.0 - m / pf; p],
            m,
        });
    }
    let k = k_for_extent(m, q, lambdas);
    let mut d = two_param_deltas(k, q, lambdas);
    d.m = m;
    Ok(d)
}

/// Solves `m(k) = m` for `k` by bisection on `ln k`; `0 < m < p`.
pub fn k_for_extent(m: f64, q: f64, lambdas: &[f64]) -> f64 {
    let extent = |ln_k: f64| two_param_deltas(ln_k.exp(), q, lambdas).m;
    let a_mean = lambdas.iter().map(|l| l.powf(q - 1.0)).sum::<f64>() / lambdas.len() as f64;
    let start = -a_mean.ln();
    let (mut lo, mut hi) = (start - 1.0, start + 1.0);
    while extent(lo) > m {
        lo -= 2.0 * (hi - lo);
    }
    while extent(hi) < m {
        hi += 2.0 * (hi - lo);
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if extent(mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Cosine between `|ρ|` and `λ^{(1-q)/2}`.
pub fn crl(q: f64, rho: &[f64], lambdas: &[f64]) -> Result<f64> {
    let r2: f64 = rho.iter().map(|r| r * r).sum();
    if !(r2 > 0.0) {
        return Err(Error::TerminusOptimal);
    }
    if rho.len() == 1 {
        return Ok(1.0);
    }
    // homogeneous in λ, so rescale by λ_max to keep powers finite
    let top = lambdas.iter().copied().fold(0.0, f64::max);
    let l: Vec<f64> = lambdas
        .iter()
        .map(|v| (v / top).powf(0.5 * (1.0 - q)))
        .collect();
    let num: f64 = rho.iter().zip(&l).map(|(r, v)| r.abs() * v).sum();
    let ll: f64 = l.iter().map(|v| v * v).sum();
    Ok((num / (r2 * ll).sqrt()).min(1.0))
}

/// Restricted maximum-likelihood solution for one fixed q-shape.
#[derive(Debug, Clone, Serialize)]
pub struct RestrictedMl {
    pub q: f64,
    pub crl: f64,
    pub nu_hat: f64,
    pub u2_min: f64,
    pub sigma2_hat: f64,
    pub k_hat: f64,
    pub m_hat: f64,
    pub chisq: f64,
}

pub fn restricted_ml(
    q: f64,
    comps: &ComponentSummary,
    lambdas: &[f64],
    n: usize,
) -> Result<RestrictedMl> {
    let r2 = comps.r2;
    if !(r2 > 0.0) {
        return Err(Error::TerminusOptimal);
    }
    if r2 >= 1.0 {
        return Err(Error::PerfectFit);
    }
    let nf = n as f64;
    let crl = crl(q, &comps.rho, lambdas)?;
    let crl2 = crl * crl;
    let s: f64 = comps
        .rho
        .iter()
        .zip(lambdas)
        .map(|(r, l)| r.abs() * l.powf(0.5 * (1.0 - q)))
        .sum();
    let t: f64 = lambdas.iter().map(|l| l.powf(1.0 - q)).sum();
    let nu_hat = comps.yty.sqrt() * s / t;
    let u2_min = comps.yty * (1.0 - r2 * crl2);
    let k_hat = t * (1.0 - r2 * crl2) / (nf * r2 * crl2);
    let m_hat = two_param_deltas(k_hat, q, lambdas).m;
    let chisq = nf * (r2 * (1.0 - crl2) / (1.0 - r2)).ln_1p();
    Ok(RestrictedMl {
        q,
        crl,
        nu_hat,
        u2_min,
        sigma2_hat: u2_min / nf,
        k_hat,
        m_hat,
        chisq,
    })
}

/// Search grid of q-shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub qmin: f64,
    pub qmax: f64,
    pub qstep: f64,
}

impl Default for QGrid {
    fn default() -> Self {
        Self {
            qmin: -5.0,
            qmax: 5.0,
            qstep: 0.5,
        }
    }
}

impl QGrid {
    pub fn single(q: f64) -> Self {
        Self {
            qmin: q,
            qmax: q,
            qstep: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let single = self.qmin == self.qmax;
        if !(self.qmin.is_finite() && self.qmax.is_finite()) || (!single && self.qmin >= self.qmax)
        {
            return Err(Error::InvalidArgument(format!(
                "need qmin < qmax (got {} and {})",
                self.qmin, self.qmax
            )));
        }
        if !(self.qstep > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "qstep {} must be > 0",
                self.qstep
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.qmax - self.qmin) / self.qstep + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| self.qmin + i as f64 * self.qstep)
            .collect()
    }
}

/// One q-grid evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct QEval {
    pub q: f64,
    pub crl: f64,
    pub k: f64,
    pub m: f64,
    pub chisq: f64,
}

/// Best 2-parameter path on a q-grid and its ML shrinkage extent.
#[derive(Debug, Clone, Serialize)]
pub struct QMSolution {
    pub q_star: f64,
    pub k_star: f64,
    pub m_star: f64,
    pub crl_star: f64,
    pub sigma2_hat: f64,
    pub nu_hat: f64,
    pub chisq: f64,
    pub df: usize,
    /// Upper 99% point of χ² on `df` degrees of freedom (absent when `df = 0`).
    pub chisq_99: Option<f64>,
    pub deltas: Vec<f64>,
    pub qgrid_evals: Vec<QEval>,
}

const CRL_TIE: f64 = 1e-12;

pub fn qm_search(
    comps: &ComponentSummary,
    lambdas: &[f64],
    n: usize,
    grid: &QGrid,
) -> Result<QMSolution> {
    grid.validate()?;
    let fits: Vec<RestrictedMl> = grid
        .points()
        .into_par_iter()
        .map(|q| restricted_ml(q, comps, lambdas, n))
        .collect::<Result<_>>()?;

    let mut best = &fits[0];
    for f in &fits[1..] {
        let better = if (f.crl - best.crl).abs() <= CRL_TIE {
            (f.q.abs(), f.q) < (best.q.abs(), best.q)
        } else {
            f.crl > best.crl
        };
        if better {
            best = f;
        }
    }

    let p = lambdas.len();
    let df = p.saturating_sub(2);
    Ok(QMSolution {
        q_star: best.q,
        k_star: best.k_hat,
        m_star: best.m_hat,
        crl_star: best.crl,
        sigma2_hat: best.sigma2_hat,
        nu_hat: best.nu_hat,
        chisq: best.chisq,
        df,
        chisq_99: chisq_upper_point(df, 0.99),
        deltas: two_param_deltas(best.k_hat, best.q, lambdas).deltas,
        qgrid_evals: fits
            .iter()
            .map(|f| QEval {
                q: f.q,
                crl: f.crl,
                k: f.k_hat,
                m: f.m_hat,
                chisq: f.chisq,
            })
            .collect(),
    })
}

/// Upper `prob` quantile of a χ² variate with `df` degrees of freedom.
pub fn chisq_upper_point(df: usize, prob: f64) -> Option<f64> {
    if df == 0 {
        return None;
    }
    ChiSquared::new(df as f64).ok().map(|d| d.inverse_cdf(prob))
}

/// Componentwise ML estimate of the MSE-optimal δ-factors.
#[derive(Debug, Clone, Serialize)]
pub struct MLComponentFit {
    pub delta_ml: Vec<f64>,
    pub gamma_ml: Vec<f64>,
    pub m_knot: f64,
}

pub fn ml_components(comps: &ComponentSummary, n: usize) -> Result<MLComponentFit> {
    if comps.r2 >= 1.0 {
        return Err(Error::PerfectFit);
    }
    let nf = n as f64;
    let resid = 1.0 - comps.r2;
    let delta_ml: Vec<f64> = comps
        .rho
        .iter()
        .map(|r| {
            let s = nf * r * r;
            s / (s + resid)
        })
        .collect();
    let gamma_ml = delta_ml.iter().zip(&comps.c).map(|(d, c)| d * c).collect();
    let m_knot = delta_ml.len() as f64 - delta_ml.iter().sum::<f64>();
    Ok(MLComponentFit {
        delta_ml,
        gamma_ml,
        m_knot,
    })
}

/// Two-piece linear δ(m): from OLS to the ML knot, then straight to zero.
pub fn efficient_path_deltas(m: f64, fit: &MLComponentFit) -> Result<DeltaVector> {
    let p = fit.delta_ml.len();
    let pf = p as f64;
    if !(m >= -RANGE_SLACK && m <= pf + RANGE_SLACK) {
        return Err(Error::ExtentOutOfRange { m, p });
    }
    let m = m.clamp(0.0, pf);
    let knot = fit.m_knot;
    let first_piece = knot >= pf || (m <= knot && knot > 0.0);
    let deltas: Vec<f64> = if first_piece {
        let t = m / knot.min(pf);
        fit.delta_ml
            .iter()
            .map(|d| {
                if knot >= pf {
                    1.0 - m / pf
                } else {
                    1.0 - t * (1.0 - d)
                }
            })
            .collect()
    } else {
        let t = (pf - m) / (pf - knot.max(0.0));
        fit.delta_ml
            .iter()
            .map(|d| if knot <= 0.0 { t } else { d * t })
            .collect()
    };
    Ok(DeltaVector { deltas, m })
}

/// Which family a shrinkage path belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathKind {
    Efficient,
    /// 2-parameter path with a fixed shape, or the best shape on a grid.
    Qm {
        q: Option<f64>,
        grid: QGrid,
    },
    HoerlKennard,
    Uniform,
}

impl PathKind {
    /// Fixed q-shape of a 2-parameter kind, `None` for the efficient path or a search.
    pub fn fixed_q(&self) -> Option<f64> {
        match self {
            PathKind::Efficient => None,
            PathKind::Qm { q, .. } => *q,
            PathKind::HoerlKennard => Some(0.0),
            PathKind::Uniform => Some(1.0),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PathKind::Efficient => "eff",
            PathKind::Qm { .. } => "qm",
            PathKind::HoerlKennard => "hk",
            PathKind::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub kind: PathKind,
    pub grid_steps_per_unit_m: usize,
}

impl PathSpec {
    pub const DEFAULT_STEPS: usize = 20;

    pub fn new(kind: PathKind) -> Self {
        Self {
            kind,
            grid_steps_per_unit_m: Self::DEFAULT_STEPS,
        }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.grid_steps_per_unit_m = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_steps_per_unit_m < 1 {
            return Err(Error::InvalidArgument(
                "grid steps per unit m must be >= 1".into(),
            ));
        }
        if let PathKind::Qm { q: None, grid } = &self.kind {
            grid.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn comps_from(rho: &[f64], lambdas: &[f64], yty: f64, n: usize) -> ComponentSummary {
        let p = rho.len();
        let r2: f64 = rho.iter().map(|r| r * r).sum();
        let dfe = n - p - 1;
        let d = dfe as f64;
        ComponentSummary {
            c: rho
                .iter()
                .zip(lambdas)
                .map(|(r, l)| r * (yty / l).sqrt())
                .collect(),
            rho: rho.to_vec(),
            r2,
            s2: yty * (1.0 - r2) / d,
            f: rho.iter().map(|r| d * r * r / (1.0 - r2)).collect(),
            tau: rho.iter().map(|r| r * (d / (1.0 - r2)).sqrt()).collect(),
            noncentrality_hat: rho.iter().map(|r| n as f64 * r * r / (1.0 - r2)).collect(),
            yty,
            dfe,
            n,
        }
    }

    #[test]
    fn oracle_special_values() {
        assert_eq!(delta_mse_oracle(0.0, 3.0, 2.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            delta_mse_oracle(2.0, 1.0, 2.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_eq!(delta_mse_oracle(1.5, 1.0, 0.0).unwrap(), 1.0);
        assert!(matches!(
            delta_mse_oracle(0.0, 1.0, 0.0),
            Err(Error::Indeterminate)
        ));
        assert!(delta_mse_oracle(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn m_extent_examples() {
        assert_eq!(m_extent(&[1.0; 4]).unwrap(), 0.0);
        assert_eq!(m_extent(&[0.0; 4]).unwrap(), 4.0);
        assert_eq!(m_extent(&[1.0, 0.5, 0.5, 0.0]).unwrap(), 2.0);
        assert!(m_extent(&[1.2]).is_err());
        assert!(m_extent(&[-0.1]).is_err());
    }

    #[test]
    fn two_param_examples() {
        let d = two_param_deltas(0.0, -2.0, &[5.0, 1.0, 0.1]);
        assert_eq!(d.deltas, vec![1.0; 3]);
        assert_eq!(d.m, 0.0);
        let d = two_param_deltas(1.0, 1.0, &[5.0, 1.0, 0.1]);
        assert_eq!(d.deltas, vec![0.5; 3]);
        let d = two_param_deltas(1.0, 0.0, &[2.0, 1.0]);
        assert_abs_diff_eq!(d.deltas[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.deltas[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn extent_inversion_round_trips() {
        let lambdas = [26.8, 18.9, 2.24, 0.0195];
        for &q in &[-5.0, -1.0, 0.0, 0.5, 3.0] {
            for &m in &[0.01, 0.7, 2.0, 3.5, 3.99] {
                let d = two_param_at_extent(m, q, &lambdas).unwrap();
                let direct = m_extent(&d.deltas).unwrap();
                assert_abs_diff_eq!(direct, m, epsilon = 1e-9);
            }
        }
        assert!(two_param_at_extent(4.5, 0.0, &lambdas).is_err());
    }

    #[test]
    fn crl_examples() {
        assert_eq!(crl(3.0, &[0.4], &[2.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            crl(1.0, &[0.3, -0.3, 0.3], &[5.0, 1.0, 0.2]).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            crl(1.0, &[0.6, 0.3], &[2.0, 1.0]).unwrap(),
            0.9 / (0.45f64 * 2.0).sqrt(),
            epsilon = 1e-12
        );
        // q = 1 gives the L-vector (1, 1)
        assert_abs_diff_eq!(
            crl(1.0, &[0.6, 0.3], &[2.0, 1.0]).unwrap(),
            0.9486832980505138,
            epsilon = 1e-12
        );
        assert!(crl(0.0, &[0.0, 0.0], &[2.0, 1.0]).is_err());
    }

    #[test]
    fn restricted_ml_substitutions() {
        let c = comps_from(&[0.5f64.sqrt()], &[1.0], 99.0, 100);
        let r = restricted_ml(0.0, &c, &[1.0], 100).unwrap();
        assert_eq!(r.crl, 1.0);
        assert_abs_diff_eq!(r.k_hat, 0.01, epsilon = 1e-14);
        assert_eq!(r.chisq, 0.0);

        // n = 50, R² = 0.8, CRL² = 0.9, Σλ^{1-q} = 3 (q = 1, p = 3)
        let k = 3.0 * (1.0 - 0.72) / (50.0 * 0.72);
        assert_abs_diff_eq!(k, 0.023333333333, epsilon = 1e-9);
        // construct ρ with R² = 0.8 and CRL(1)² = 0.9: |ρ| = a(1,1,1) + b·w, w ⟂ 1
        let a = (0.8f64 * 0.9 / 3.0).sqrt();
        let b = (0.8f64 * 0.1 / 2.0).sqrt();
        let rho = [a + b, a - b, a];
        let c = comps_from(&rho, &[1.0, 1.0, 1.0], 49.0, 50);
        let r = restricted_ml(1.0, &c, &[1.0, 1.0, 1.0], 50).unwrap();
        assert_abs_diff_eq!(r.crl * r.crl, 0.9, epsilon = 1e-12);
        assert_relative_eq!(r.k_hat, k, max_relative = 1e-10);
    }

    #[test]
    fn restricted_ml_degenerate() {
        let c = comps_from(&[0.0, 0.0], &[2.0, 1.0], 10.0, 10);
        assert!(matches!(
            restricted_ml(0.0, &c, &[2.0, 1.0], 10),
            Err(Error::TerminusOptimal)
        ));
    }

    #[test]
    fn qgrid_points() {
        let g = QGrid::default();
        let pts = g.points();
        assert_eq!(pts.len(), 21);
        assert_eq!(pts[0], -5.0);
        assert_eq!(pts[10], 0.0);
        assert_eq!(pts[20], 5.0);
        assert!(QGrid {
            qmin: 1.0,
            qmax: 0.0,
            qstep: 0.5
        }
        .validate()
        .is_err());
        assert!(QGrid {
            qmin: 0.0,
            qmax: 1.0,
            qstep: 0.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn single_predictor_search_prefers_q_zero() {
        let c = comps_from(&[0.5], &[1.0], 99.0, 100);
        let s = qm_search(&c, &[1.0], 100, &QGrid::default()).unwrap();
        assert_eq!(s.q_star, 0.0);
        assert_eq!(s.df, 0);
        assert!(s.chisq_99.is_none());
        assert!(s.qgrid_evals.iter().all(|e| e.chisq == 0.0));
    }

    #[test]
    fn ml_component_examples() {
        let c = comps_from(&[0.5], &[1.0], 99.0, 100);
        let fit = ml_components(&c, 100).unwrap();
        assert_abs_diff_eq!(fit.delta_ml[0], 25.0 / 25.75, epsilon = 1e-14);
        assert_abs_diff_eq!(
            fit.gamma_ml[0],
            25.0 / 25.75 * 0.5 * 99f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(fit.gamma_ml[0], 4.8300, epsilon = 1e-4);

        let c = comps_from(&[0.0, 0.7], &[2.0, 1.0], 20.0, 21);
        let fit = ml_components(&c, 21).unwrap();
        assert_eq!(fit.delta_ml[0], 0.0);
        assert_eq!(fit.gamma_ml[0], 0.0);

        let mut perfect = c.clone();
        perfect.r2 = 1.0;
        assert!(matches!(
            ml_components(&perfect, 21),
            Err(Error::PerfectFit)
        ));
    }

    #[test]
    fn efficient_path_landmarks() {
        let fit = MLComponentFit {
            delta_ml: vec![0.9, 0.2, 0.6],
            gamma_ml: vec![0.0; 3],
            m_knot: 3.0 - 1.7,
        };
        assert_eq!(
            efficient_path_deltas(0.0, &fit).unwrap().deltas,
            vec![1.0; 3]
        );
        let at_knot = efficient_path_deltas(fit.m_knot, &fit).unwrap();
        for (a, b) in at_knot.deltas.iter().zip(&fit.delta_ml) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        assert_eq!(
            efficient_path_deltas(3.0, &fit).unwrap().deltas,
            vec![0.0; 3]
        );
        assert!(efficient_path_deltas(3.1, &fit).is_err());
        assert!(efficient_path_deltas(-0.1, &fit).is_err());
    }

    #[test]
    fn efficient_path_degenerate_knots() {
        let none = MLComponentFit {
            delta_ml: vec![0.0, 0.0],
            gamma_ml: vec![0.0; 2],
            m_knot: 2.0,
        };
        let d = efficient_path_deltas(0.5, &none).unwrap();
        assert_eq!(d.deltas, vec![0.75, 0.75]);
        let full = MLComponentFit {
            delta_ml: vec![1.0, 1.0],
            gamma_ml: vec![0.0; 2],
            m_knot: 0.0,
        };
        let d = efficient_path_deltas(0.5, &full).unwrap();
        assert_eq!(d.deltas, vec![0.75, 0.75]);
        assert_eq!(
            efficient_path_deltas(0.0, &full).unwrap().deltas,
            vec![1.0, 1.0]
        );
    }
}
