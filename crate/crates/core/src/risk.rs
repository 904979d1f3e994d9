//! Relative MSE risk of fixed shrinkage factors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::design::{orient, ComponentSummary};
use crate::error::{Error, Result};
use crate::shrinkage::DeltaVector;

/// Eigenvalues of the risk difference below this flag an inferior direction.
pub const INFERIOR_THRESHOLD: f64 = -1e-10;

/// Unbiased estimate of `MSE(Δc) / σ²` in component coordinates, with its
/// diagonal clamped below by the known scaled variance `δ²/λ`.
#[derive(Debug, Clone)]
pub struct RelativeRisk {
    pub t_hat: DMatrix<f64>,
    pub diag_clamped: Vec<f64>,
    pub variance_floor: Vec<f64>,
    pub clamped_flags: Vec<bool>,
}

pub fn relative_mse(
    delta: &DeltaVector,
    comps: &ComponentSummary,
    lambdas: &[f64],
    n: usize,
) -> Result<RelativeRisk> {
    let p = lambdas.len();
    if p + 4 > n {
        return Err(Error::RiskUndefined { p, n });
    }
    if delta.p() != p || comps.tau.len() != p {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let dfe = (n - p - 1) as f64;
    let scale = (dfe - 2.0) / dfe;
    let v = DVector::from_fn(p, |i, _| {
        (1.0 - delta.deltas[i]) * comps.tau[i] / lambdas[i].sqrt()
    });
    let mut t_hat = (&v * v.transpose()) * scale;
    for i in 0..p {
        t_hat[(i, i)] += (2.0 * delta.deltas[i] - 1.0) / lambdas[i];
    }
    let variance_floor: Vec<f64> = (0..p)
        .map(|i| delta.deltas[i] * delta.deltas[i] / lambdas[i])
        .collect();
    let clamped_flags: Vec<bool> = (0..p).map(|i| t_hat[(i, i)] < variance_floor[i]).collect();
    let diag_clamped = (0..p)
        .map(|i| t_hat[(i, i)].max(variance_floor[i]))
        .collect();
    Ok(RelativeRisk {
        t_hat,
        diag_clamped,
        variance_floor,
        clamped_flags,
    })
}

/// Direction in β-space along which the shrunken estimate is estimated to
/// be riskier than OLS.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferiorDirection {
    pub present: bool,
    pub direction: Option<Vec<f64>>,
    pub excess: f64,
}

pub fn inferior_direction(
    delta: &DeltaVector,
    risk: &RelativeRisk,
    lambdas: &[f64],
    g: &DMatrix<f64>,
) -> InferiorDirection {
    let p = lambdas.len();
    debug_assert_eq!(delta.p(), p);
    let mut diff = -risk.t_hat.clone();
    for i in 0..p {
        diff[(i, i)] += 1.0 / lambdas[i];
    }
    // symmetrize against rounding
    let diff = (&diff + diff.transpose()) * 0.5;
    let eig = SymmetricEigen::new(diff);
    let (idx, &min) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("p >= 1");
    if min >= INFERIOR_THRESHOLD {
        return InferiorDirection {
            present: false,
            direction: None,
            excess: min.min(0.0),
        };
    }
    let mut dir = g * eig.eigenvectors.column(idx);
    let norm = dir.norm();
    dir /= norm;
    let mut dir: Vec<f64> = dir.iter().copied().collect();
    orient(&mut dir);
    InferiorDirection {
        present: true,
        direction: Some(dir),
        excess: min,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn comps(tau: &[f64]) -> ComponentSummary {
        ComponentSummary {
            c: vec![0.0; tau.len()],
            rho: vec![0.0; tau.len()],
            r2: 0.5,
            s2: 1.0,
            f: tau.iter().map(|t| t * t).collect(),
            tau: tau.to_vec(),
            noncentrality_hat: vec![0.0; tau.len()],
            yty: 1.0,
            dfe: 0,
            n: 0,
        }
    }

    #[test]
    fn identity_shrinkage_is_ols_variance() {
        let lambdas = [3.0, 0.5];
        let r = relative_mse(
            &DeltaVector::identity(2),
            &comps(&[4.0, -1.0]),
            &lambdas,
            20,
        )
        .unwrap();
        assert_abs_diff_eq!(r.t_hat[(0, 0)], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.t_hat[(1, 1)], 2.0, epsilon = 1e-15);
        assert_eq!(r.t_hat[(0, 1)], 0.0);
        assert_eq!(r.clamped_flags, vec![false, false]);
        let g = DMatrix::identity(2, 2);
        let inf = inferior_direction(&DeltaVector::identity(2), &r, &lambdas, &g);
        assert!(!inf.present);
    }

    #[test]
    fn zero_shrinkage_substitution() {
        let lambdas = [3.0, 0.5];
        let tau = [4.0, -1.0];
        let n = 20;
        let r = relative_mse(&DeltaVector::zero(2), &comps(&tau), &lambdas, n).unwrap();
        let a = (n as f64 - 2.0 - 3.0) / (n as f64 - 2.0 - 1.0);
        for i in 0..2 {
            for j in 0..2 {
                let expect = a * tau[i] * tau[j] / (lambdas[i] * lambdas[j]).sqrt()
                    - if i == j { 1.0 / lambdas[i] } else { 0.0 };
                assert_abs_diff_eq!(r.t_hat[(i, j)], expect, epsilon = 1e-13);
            }
        }
        // floors are zero at Δ = 0
        assert_eq!(r.variance_floor, vec![0.0, 0.0]);
    }

    #[test]
    fn needs_four_spare_rows() {
        assert!(matches!(
            relative_mse(&DeltaVector::identity(3), &comps(&[1.0; 3]), &[1.0; 3], 6),
            Err(Error::RiskUndefined { p: 3, n: 6 })
        ));
        assert!(relative_mse(&DeltaVector::identity(3), &comps(&[1.0; 3]), &[1.0; 3], 7).is_ok());
    }

    #[test]
    fn clamping_floor() {
        // tiny τ makes the bias term negligible so T̂_ii = (2δ-1)/λ < δ²/λ
        let lambdas = [1.0, 1.0];
        let d = DeltaVector::new(vec![0.3, 0.9]).unwrap();
        let r = relative_mse(&d, &comps(&[0.0, 0.0]), &lambdas, 30).unwrap();
        assert_eq!(r.clamped_flags, vec![true, true]);
        assert_abs_diff_eq!(r.diag_clamped[0], 0.09, epsilon = 1e-15);
        assert_abs_diff_eq!(r.diag_clamped[1], 0.81, epsilon = 1e-15);
    }

    #[test]
    fn fully_shrunk_significant_component_is_inferior() {
        let lambdas = [2.0, 0.5];
        let d = DeltaVector::new(vec![0.0, 1.0]).unwrap();
        let r = relative_mse(&d, &comps(&[12.0, 0.5]), &lambdas, 40).unwrap();
        // D_11 = 1/λ₁ - (a τ₁²/λ₁ - 1/λ₁) is strongly negative
        let theta = 0.3f64;
        let g =
            DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        let inf = inferior_direction(&d, &r, &lambdas, &g);
        assert!(inf.present);
        assert!(inf.excess < 0.0);
        let dir = inf.direction.unwrap();
        let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        // direction is the first principal axis
        assert_abs_diff_eq!(dir[0].abs(), theta.cos(), epsilon = 1e-9);
    }
}
