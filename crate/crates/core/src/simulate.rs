//! Seeded Monte-Carlo comparison of shrinkage estimators against OLS.
//!
//! Each scenario fixes `X` once (exact eigenvalue spectrum of the centered
//! `X'X`) and draws independent response vectors. Replicate `i` uses ChaCha
//! stream `i + 1` of the scenario seed, the design uses stream 0, so reports
//! do not depend on how replicates are scheduled across threads.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{back_transform, orient, Fit, StandardizedDesign};
use crate::error::{Error, Result};
use crate::shrinkage::{
    delta_mse_oracle, grr_estimate, ml_components, qm_search, DeltaVector, QGrid,
};
use crate::trace::fmt_sig;

/// Orientation of the principal axes `G` of the generated design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axes {
    Identity,
    /// Haar-random orthogonal matrix drawn from the design stream, rotated so
    /// that every predictor has the same sum of squares.
    Random,
    /// Rows of an explicit orthogonal matrix.
    Explicit(Vec<Vec<f64>>),
}

/// Direction of the true coefficient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaOrientation {
    Explicit(Vec<f64>),
    /// Along the axis of the largest eigenvalue (favorable case).
    MajorAxis,
    /// Along the axis of the smallest eigenvalue (unfavorable case).
    MinorAxis,
}

fn default_axes() -> Axes {
    Axes::Random
}

fn default_beta_length() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    /// Eigenvalues of the centered `X'X`.
    pub spectrum: Vec<f64>,
    #[serde(default = "default_axes")]
    pub axes: Axes,
    pub beta: BetaOrientation,
    /// Length of an axis-oriented β when no target R² is given.
    #[serde(default = "default_beta_length")]
    pub beta_length: f64,
    pub sigma2: f64,
    /// Rescales β so that `β'X'Xβ / (β'X'Xβ + (n-1)σ²)` equals this value.
    #[serde(default)]
    pub target_r2: Option<f64>,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// q-shapes searched by the 2-parameter ML estimator.
    #[serde(default)]
    pub qgrid: QGrid,
}

impl Scenario {
    pub fn p(&self) -> usize {
        self.spectrum.len()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        let mut problems = Vec::new();
        if p == 0 {
            problems.push("empty spectrum".to_owned());
        }
        if self.spectrum.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            problems.push("spectrum must be positive".to_owned());
        }
        if self.n < p + 2 {
            problems.push(format!("n = {} too small for p = {p}", self.n));
        }
        if self.replications < 1 {
            problems.push("replications must be >= 1".to_owned());
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            problems.push("sigma2 must be >= 0".to_owned());
        }
        if let Some(r2) = self.target_r2 {
            if !(r2 > 0.0 && r2 < 1.0) {
                problems.push("target_r2 must lie in (0, 1)".to_owned());
            }
            if !(self.sigma2 > 0.0) {
                problems.push("target_r2 needs sigma2 > 0".to_owned());
            }
        }
        if let BetaOrientation::Explicit(b) = &self.beta {
            if b.len() != p {
                problems.push(format!("beta has {} entries, spectrum {p}", b.len()));
            }
        }
        if let Axes::Explicit(rows) = &self.axes {
            if rows.len() != p || rows.iter().any(|r| r.len() != p) {
                problems.push(format!("axes must be {p}x{p}"));
            }
        }
        if let Err(e) = self.qgrid.validate() {
            problems.push(e.to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(problems.join("; ")))
        }
    }

    /// Two highly correlated predictors (r = 0.99), n = 500, σ² = 18 and
    /// β = (2.3382, -1.7809). The correlation is illustrative only.
    pub fn correlated_pair_demo(replications: usize, seed: u64) -> Self {
        let n = 500;
        let r = 0.99;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            n,
            spectrum: vec![(n - 1) as f64 * (1.0 + r), (n - 1) as f64 * (1.0 - r)],
            axes: Axes::Explicit(vec![vec![h, h], vec![h, -h]]),
            beta: BetaOrientation::Explicit(vec![2.3382, -1.7809]),
            beta_length: 1.0,
            sigma2: 18.0,
            target_r2: None,
            replications,
            seed,
            qgrid: QGrid::default(),
        }
    }
}

/// The fixed part of a scenario: design matrix and true coefficients.
#[derive(Debug, Clone)]
pub struct SimulationDesign {
    pub x: DMatrix<f64>,
    pub beta: DVector<f64>,
    pub axes: DMatrix<f64>,
    pub mean: DVector<f64>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // column-major fill keeps the draw order fixed
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn orthonormal_columns(mut z: DMatrix<f64>) -> DMatrix<f64> {
    let cols = z.ncols();
    for j in 0..cols {
        for k in 0..j {
            let d = z.column(k).dot(&z.column(j));
            let prev = z.column(k).into_owned();
            z.column_mut(j).axpy(-d, &prev, 1.0);
        }
        let norm = z.column(j).norm();
        z.column_mut(j).iter_mut().for_each(|v| *v /= norm);
    }
    z
}

/// Bendel-Mickey rotations of the predictor space so that `G Λ G'` has a
/// constant diagonal. Column standardization then rescales the spectrum
/// uniformly and leaves the axes untouched.
fn equalize_column_scales(g: &mut DMatrix<f64>, lambdas: &[f64]) {
    let p = lambdas.len();
    let target = lambdas.iter().sum::<f64>() / p as f64;
    let lam = DMatrix::from_diagonal(&DVector::from_column_slice(lambdas));
    let tol = 1e-12 * target;
    for _ in 0..p {
        let c = &*g * &lam * g.transpose();
        let low = (0..p).find(|&i| c[(i, i)] < target - tol);
        let high = (0..p).find(|&j| c[(j, j)] > target + tol);
        let (Some(i), Some(j)) = (low, high) else {
            break;
        };
        let (a, b, e) = (c[(i, i)] - target, c[(j, j)] - target, c[(i, j)]);
        // tan θ solving b t² - 2e t + a = 0 sets the rotated (i, i) entry to target
        let t = (e + (e * e - a * b).sqrt()) / b;
        let cos = 1.0 / (1.0 + t * t).sqrt();
        let sin = t * cos;
        for k in 0..p {
            let (gi, gj) = (g[(i, k)], g[(j, k)]);
            g[(i, k)] = cos * gi - sin * gj;
            g[(j, k)] = sin * gi + cos * gj;
        }
    }
}

pub fn prepare(scenario: &Scenario) -> Result<SimulationDesign> {
    scenario.validate()?;
    let (n, p) = (scenario.n, scenario.p());
    let mut rng = rng_for(scenario.seed, 0);

    let mut z = gaussian_matrix(&mut rng, n, p);
    for mut col in z.column_iter_mut() {
        let mean = col.mean();
        col.iter_mut().for_each(|v| *v -= mean);
    }
    let h = orthonormal_columns(z);

    let mut g = match &scenario.axes {
        Axes::Identity => DMatrix::identity(p, p),
        Axes::Random => orthonormal_columns(gaussian_matrix(&mut rng, p, p)),
        Axes::Explicit(rows) => {
            let g = DMatrix::from_fn(p, p, |i, j| rows[i][j]);
            let err = (g.tr_mul(&g) - DMatrix::identity(p, p)).amax();
            if err > 1e-8 {
                return Err(Error::InvalidArgument(
                    "explicit axes are not orthogonal".into(),
                ));
            }
            g
        }
    };
    // eigen-order the requested spectrum
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| scenario.spectrum[b].total_cmp(&scenario.spectrum[a]));
    let sorted: Vec<f64> = order.iter().map(|&i| scenario.spectrum[i]).collect();
    if scenario.axes == Axes::Random {
        equalize_column_scales(&mut g, &sorted);
    }
    for mut col in g.column_iter_mut() {
        orient(col.as_mut_slice());
    }
    let root = DMatrix::from_diagonal(&DVector::from_iterator(p, sorted.iter().map(|l| l.sqrt())));
    let x = &h * root * g.transpose();

    let mut beta = match &scenario.beta {
        BetaOrientation::Explicit(b) => DVector::from_column_slice(b),
        BetaOrientation::MajorAxis => g.column(0) * scenario.beta_length,
        BetaOrientation::MinorAxis => g.column(p - 1) * scenario.beta_length,
    };
    if let Some(r2) = scenario.target_r2 {
        let signal = (&x * &beta).norm_squared();
        if !(signal > 0.0) {
            return Err(Error::InvalidArgument("target_r2 with zero beta".into()));
        }
        let wanted = r2 / (1.0 - r2) * (n - 1) as f64 * scenario.sigma2;
        beta *= (wanted / signal).sqrt();
    }
    let mean = &x * &beta;
    Ok(SimulationDesign {
        x,
        beta,
        axes: g,
        mean,
    })
}

impl SimulationDesign {
    pub fn response(&self, scenario: &Scenario, replicate: usize) -> DVector<f64> {
        let sigma = scenario.sigma2.sqrt();
        if sigma == 0.0 {
            return self.mean.clone();
        }
        let mut rng = rng_for(scenario.seed, replicate as u64 + 1);
        self.mean.map(|mu| {
            let e: f64 = StandardNormal.sample(&mut rng);
            mu + sigma * e
        })
    }
}

/// Design matrix and the replicate's response vector.
pub fn generate(scenario: &Scenario, replicate: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let d = prepare(scenario)?;
    let y = d.response(scenario, replicate);
    Ok((d.x, y))
}

pub const ESTIMATORS: [&str; 5] = ["ols", "efficient_ml", "qm_ml", "uniform_ml", "oracle"];

#[derive(Debug, Clone, Serialize)]
pub struct EstimatorRisk {
    pub estimator: String,
    /// Mean of `‖β̂ - β‖²` over replicates.
    pub summed_mse: f64,
    pub ratio_to_ols: f64,
    /// Monte-Carlo standard error of `summed_mse`.
    pub std_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskReport {
    pub seed: u64,
    pub replications: usize,
    pub n: usize,
    pub p: usize,
    pub beta: Vec<f64>,
    /// Exact OLS summed MSE `σ² Σ 1/λ_i`.
    pub ols_theoretical: f64,
    pub estimators: Vec<EstimatorRisk>,
    /// How often each q-shape was selected by the 2-parameter search.
    pub q_selected: BTreeMap<String, usize>,
}

impl RiskReport {
    pub fn get(&self, name: &str) -> Option<&EstimatorRisk> {
        self.estimators.iter().find(|e| e.estimator == name)
    }

    /// Share of replicates whose selected q-shape equals `q`.
    pub fn q_share(&self, q: f64) -> f64 {
        self.q_selected.get(&q_key(q)).copied().unwrap_or(0) as f64 / self.replications as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("estimator,summed_mse,ratio_to_ols,std_error\n");
        for e in &self.estimators {
            s.push_str(&format!(
                "{},{},{},{}\n",
                e.estimator,
                fmt_sig(e.summed_mse, 12),
                fmt_sig(e.ratio_to_ols, 12),
                fmt_sig(e.std_error, 12)
            ));
        }
        s
    }

    pub fn write(&self, csv: Option<&Path>, json: Option<&Path>) -> Result<()> {
        if let Some(path) = csv {
            fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))?;
        }
        if let Some(path) = json {
            let body = serde_json::to_string_pretty(self)? + "\n";
            fs::write(path, body).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

fn q_key(q: f64) -> String {
    format!("{q:+.2}")
}

struct ReplicateOutcome {
    sse: [f64; 5],
    q_star: f64,
}

fn sse(est: &[f64], beta: &DVector<f64>) -> f64 {
    est.iter()
        .zip(beta.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum()
}

fn run_replicate(
    scenario: &Scenario,
    sim: &SimulationDesign,
    oracle: &OracleFactors,
    index: usize,
) -> Result<ReplicateOutcome> {
    let y = sim.response(scenario, index);
    // y is left unscaled: δ-factors do not depend on its scale
    let design = StandardizedDesign::from_matrix(&sim.x, &y, true, false, None)?;
    let fit = Fit::from_design(design)?;
    let (n, p) = (fit.n(), fit.p());
    let lambdas = fit.lambdas().to_vec();
    let raw = |delta: &DeltaVector| {
        back_transform(&grr_estimate(&fit.decomp, &fit.comps, delta), &fit.design).0
    };

    let ols = raw(&DeltaVector::identity(p));
    let ml = ml_components(&fit.comps, n)?;
    let eff = raw(&DeltaVector::new(ml.delta_ml)?);
    let qm = qm_search(&fit.comps, &lambdas, n, &scenario.qgrid)?;
    let qm_est = raw(&DeltaVector::new(qm.deltas)?);
    let uni = qm_search(&fit.comps, &lambdas, n, &QGrid::single(1.0))?;
    let uni_est = raw(&DeltaVector::new(uni.deltas)?);
    let oracle_est = oracle.estimate(&fit);

    Ok(ReplicateOutcome {
        sse: [
            sse(&ols, &sim.beta),
            sse(&eff, &sim.beta),
            sse(&qm_est, &sim.beta),
            sse(&uni_est, &sim.beta),
            sse(&oracle_est, &sim.beta),
        ],
        q_star: qm.q_star,
    })
}

/// MSE-optimal δ-factors from the true γ and σ, in the standardized-X
/// coordinates every replicate shares.
struct OracleFactors {
    deltas: DeltaVector,
}

impl OracleFactors {
    fn new(scenario: &Scenario, sim: &SimulationDesign) -> Result<Self> {
        let design = StandardizedDesign::from_matrix(&sim.x, &sim.mean, true, false, None)
            .or_else(|_| {
                // constant mean (β = 0): any non-constant response gives the same X scaling
                let ramp = DVector::from_fn(sim.x.nrows(), |i, _| i as f64);
                StandardizedDesign::from_matrix(&sim.x, &ramp, true, false, None)
            })?;
        let decomp = crate::design::spectral(&design)?;
        let scaled_beta = sim.beta.component_mul(&design.x_scales);
        let gamma = decomp.g.tr_mul(&scaled_beta);
        let sigma = scenario.sigma2.sqrt();
        let deltas = gamma
            .iter()
            .zip(decomp.lambdas.iter())
            .map(|(g, l)| delta_mse_oracle(*g, *l, sigma).or(Ok::<f64, Error>(1.0)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            deltas: DeltaVector::new(deltas)?,
        })
    }

    fn estimate(&self, fit: &Fit) -> Vec<f64> {
        back_transform(
            &grr_estimate(&fit.decomp, &fit.comps, &self.deltas),
            &fit.design,
        )
        .0
    }
}

pub fn run_mc(scenario: &Scenario) -> Result<RiskReport> {
    let sim = prepare(scenario)?;
    let oracle = OracleFactors::new(scenario, &sim)?;
    let outcomes: Vec<ReplicateOutcome> = (0..scenario.replications)
        .into_par_iter()
        .map(|i| {
            run_replicate(scenario, &sim, &oracle, i).map_err(|e| Error::Replicate {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let reps = outcomes.len() as f64;
    let mut means = [0.0; 5];
    for o in &outcomes {
        for (m, s) in means.iter_mut().zip(o.sse) {
            *m += s;
        }
    }
    means.iter_mut().for_each(|m| *m /= reps);
    let mut vars = [0.0; 5];
    for o in &outcomes {
        for k in 0..5 {
            vars[k] += (o.sse[k] - means[k]).powi(2);
        }
    }
    let std_errors: Vec<f64> = vars
        .iter()
        .map(|v| {
            if outcomes.len() > 1 {
                (v / (reps - 1.0) / reps).sqrt()
            } else {
                0.0
            }
        })
        .collect();

    let mut q_selected = BTreeMap::new();
    for o in &outcomes {
        *q_selected.entry(q_key(o.q_star)).or_insert(0) += 1;
    }

    Ok(RiskReport {
        seed: scenario.seed,
        replications: scenario.replications,
        n: scenario.n,
        p: scenario.p(),
        beta: sim.beta.iter().copied().collect(),
        ols_theoretical: scenario.sigma2 * scenario.spectrum.iter().map(|l| 1.0 / l).sum::<f64>(),
        estimators: ESTIMATORS
            .iter()
            .enumerate()
            .map(|(k, name)| EstimatorRisk {
                estimator: (*name).to_owned(),
                summed_mse: means[k],
                ratio_to_ols: if means[0] > 0.0 {
                    means[k] / means[0]
                } else {
                    1.0
                },
                std_error: std_errors[k],
            })
            .collect(),
        q_selected,
    })
}
