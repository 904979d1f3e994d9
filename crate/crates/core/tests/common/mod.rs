#![allow(dead_code)]

use mlridge::{RawDataset, StandardizedDesign};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Random raw dataset with correlated predictors and a linear response.
pub fn random_raw(seed: u64, n: usize, p: usize) -> RawDataset {
    let mut r = rng(seed);
    let shared: Vec<f64> = (0..n).map(|_| normal(&mut r)).collect();
    let mut names: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    let mut cols: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let offset = 3.0 * j as f64 - 2.0;
            let scale = 0.5 + j as f64;
            (0..n)
                .map(|i| offset + scale * (0.8 * shared[i] + 0.6 * normal(&mut r)))
                .collect()
        })
        .collect();
    let beta: Vec<f64> = (0..p).map(|_| normal(&mut r)).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| 10.0 + (0..p).map(|j| beta[j] * cols[j][i]).sum::<f64>() + 1.5 * normal(&mut r))
        .collect();
    names.push("y".into());
    cols.push(y);
    RawDataset::new(names, cols, "y").unwrap()
}

pub fn raw_matrix(raw: &RawDataset) -> (DMatrix<f64>, DVector<f64>) {
    let preds = raw.predictors();
    let x = DMatrix::from_fn(raw.n(), preds.len(), |i, j| preds[j][i]);
    (x, DVector::from_column_slice(raw.response()))
}

/// OLS with intercept via the normal equations on raw data (no SVD involved).
pub fn normal_equations_ols(raw: &RawDataset) -> (Vec<f64>, f64) {
    let (x, y) = raw_matrix(raw);
    let n = x.nrows();
    let mut design = DMatrix::from_element(n, x.ncols() + 1, 1.0);
    design.view_mut((0, 1), (n, x.ncols())).copy_from(&x);
    let xtx = design.tr_mul(&design);
    let xty = design.tr_mul(&y);
    let sol = xtx.lu().solve(&xty).expect("non-singular");
    (sol.iter().skip(1).copied().collect(), sol[0])
}

/// Least-squares coefficients of the already-centered design by normal equations.
pub fn centered_ls(design: &StandardizedDesign) -> DVector<f64> {
    let xtx = design.x.tr_mul(&design.x);
    xtx.lu()
        .solve(&design.x.tr_mul(&design.y))
        .expect("non-singular")
}

pub fn haldport_fit(standardize_y: bool) -> mlridge::Fit {
    mlridge::Fit::new(&mlridge::data::haldport().unwrap(), standardize_y).unwrap()
}
