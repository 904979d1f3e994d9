//! Data ingestion, centering/standardization and the principal-axis rotation.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative singular-value cutoff below which `X` is treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Raw numeric table with one designated response column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub column_names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub response_name: String,
}

impl RawDataset {
    pub fn new(
        column_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        response_name: impl Into<String>,
    ) -> Result<Self> {
        let response_name = response_name.into();
        if column_names.len() != columns.len() {
            return Err(Error::InvalidData(format!(
                "{} names for {} columns",
                column_names.len(),
                columns.len()
            )));
        }
        let hits = column_names.iter().filter(|c| **c == response_name).count();
        if hits == 0 {
            return Err(Error::MissingResponse(response_name));
        }
        if hits > 1 {
            return Err(Error::InvalidData(format!(
                "response column {response_name:?} appears {hits} times"
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 rows, got {n}")));
        }
        for (name, col) in column_names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidData(format!(
                    "column {name:?} has {} values, expected {n}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    row: row + 1,
                    column: name.clone(),
                });
            }
        }
        Ok(Self {
            column_names,
            columns,
            response_name,
        })
    }

    /// Parses a headered, comma-separated table of numbers.
    pub fn from_csv_reader<R: Read>(reader: R, response: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Csv(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(Error::Csv("empty header".into()));
        }
        if !header.iter().any(|h| h == response) {
            return Err(Error::MissingResponse(response.to_owned()));
        }
        let mut columns = vec![Vec::new(); header.len()];
        for (i, record) in rdr.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Csv(e.to_string()))?;
            if record.len() != header.len() {
                return Err(Error::Ragged {
                    row,
                    found: record.len(),
                    expected: header.len(),
                });
            }
            for ((cell, name), col) in record.iter().zip(&header).zip(columns.iter_mut()) {
                let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                    row,
                    column: name.clone(),
                    value: cell.to_owned(),
                })?;
                col.push(v);
            }
        }
        Self::new(header, columns, response)
    }

    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    fn response_index(&self) -> usize {
        self.column_names
            .iter()
            .position(|c| *c == self.response_name)
            .expect("response column validated at construction")
    }

    pub fn response(&self) -> &[f64] {
        &self.columns[self.response_index()]
    }

    pub fn predictor_names(&self) -> Vec<String> {
        let r = self.response_index();
        self.column_names
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != r)
            .map(|(_, c)| c.clone())
            .collect()
    }

    pub fn predictors(&self) -> Vec<&[f64]> {
        let r = self.response_index();
        self.columns
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != r)
            .map(|(_, c)| c.as_slice())
            .collect()
    }
}

pub fn load_csv(path: impl AsRef<Path>, response: &str) -> Result<RawDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    RawDataset::from_csv_reader(file, response)
}

/// Centered predictors (each column rescaled to sum of squares `n - 1`) and
/// centered response, plus the constants needed to map back to raw units.
#[derive(Debug, Clone)]
pub struct StandardizedDesign {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub n: usize,
    pub p: usize,
    pub x_means: DVector<f64>,
    pub x_scales: DVector<f64>,
    pub y_mean: f64,
    pub y_scale: f64,
    pub standardize_y: bool,
    pub predictor_names: Vec<String>,
}

fn mean_and_scale(v: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = v.clone().sum::<f64>() / n as f64;
    let ss: f64 = v.map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

fn is_zero_scale(mean: f64, scale: f64) -> bool {
    scale <= 1e-13 * mean.abs().max(1.0)
}

impl StandardizedDesign {
    /// Centers `x` and `y`. With `rescale_x` each predictor is scaled to sum
    /// of squares `n - 1`; with `standardize_y` so is the response.
    pub fn from_matrix(
        x: &DMatrix<f64>,
        y: &DVector<f64>,
        rescale_x: bool,
        standardize_y: bool,
        predictor_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let (n, p) = x.shape();
        if y.len() != n {
            return Err(Error::InvalidData(format!(
                "response has {} values, X has {n} rows",
                y.len()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 rows, got {n}")));
        }
        if p == 0 {
            return Err(Error::InvalidData("no predictor columns".into()));
        }
        if p > n - 1 {
            return Err(Error::TooManyPredictors { p, max: n - 1 });
        }
        let names = predictor_names.unwrap_or_else(|| (1..=p).map(|j| format!("x{j}")).collect());
        if names.len() != p {
            return Err(Error::InvalidData(format!(
                "{} names for {p} predictors",
                names.len()
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite value".into()));
        }

        let mut xs = DMatrix::zeros(n, p);
        let mut x_means = DVector::zeros(p);
        let mut x_scales = DVector::from_element(p, 1.0);
        for j in 0..p {
            let col = x.column(j);
            let (mean, scale) = mean_and_scale(col.iter().copied(), n);
            if is_zero_scale(mean, scale) {
                return Err(Error::ZeroScale(names[j].clone()));
            }
            x_means[j] = mean;
            if rescale_x {
                x_scales[j] = scale;
            }
            for i in 0..n {
                xs[(i, j)] = (col[i] - mean) / x_scales[j];
            }
        }

        let (y_mean, y_sd) = mean_and_scale(y.iter().copied(), n);
        if is_zero_scale(y_mean, y_sd) {
            return Err(Error::ZeroScale("response".into()));
        }
        let y_scale = if standardize_y { y_sd } else { 1.0 };
        let ys = y.map(|v| (v - y_mean) / y_scale);

        Ok(Self {
            x: xs,
            y: ys,
            n,
            p,
            x_means,
            x_scales,
            y_mean,
            y_scale,
            standardize_y,
            predictor_names: names,
        })
    }
}

pub fn standardize(raw: &RawDataset, standardize_y: bool) -> Result<StandardizedDesign> {
    let n = raw.n();
    let preds = raw.predictors();
    let x = DMatrix::from_fn(n, preds.len(), |i, j| preds[j][i]);
    let y = DVector::from_column_slice(raw.response());
    StandardizedDesign::from_matrix(&x, &y, true, standardize_y, Some(raw.predictor_names()))
        .map_err(|e| match e {
            Error::ZeroScale(c) if c == "response" => Error::ZeroScale(raw.response_name.clone()),
            other => other,
        })
}

/// `X = H Λ^{1/2} G'` with eigenvalues sorted non-increasing.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub lambdas: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
}

/// Flips the sign of a vector so that its largest-magnitude entry is positive
/// (first such entry on ties).
pub(crate) fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Eigenvalues closer than this (relative) share one eigenspace.
const REPEATED_EIGEN_TOLERANCE: f64 = 1e-10;

/// Replaces the arbitrary basis of each repeated-eigenvalue eigenspace with a
/// pivoted Gram-Schmidt orthonormalization of the projected coordinate axes,
/// so that e.g. `X'X = I` yields `G = I`.
fn canonicalize_repeated(lambdas: &DVector<f64>, g: &mut DMatrix<f64>) {
    let p = lambdas.len();
    let mut start = 0;
    while start < p {
        let mut end = start + 1;
        while end < p
            && (lambdas[start] - lambdas[end]).abs() <= REPEATED_EIGEN_TOLERANCE * lambdas[0]
        {
            end += 1;
        }
        let k = end - start;
        if k > 1 {
            let block = g.columns(start, k).into_owned();
            let projector = &block * block.transpose();
            let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
            let mut used = vec![false; p];
            for _ in 0..k {
                let mut best: Option<(usize, DVector<f64>, f64)> = None;
                for j in (0..p).filter(|&j| !used[j]) {
                    let mut v = projector.column(j).into_owned();
                    for b in &basis {
                        let d = b.dot(&v);
                        v -= b * d;
                    }
                    let norm = v.norm();
                    if best.as_ref().is_none_or(|(_, _, bn)| norm > *bn + 1e-12) {
                        best = Some((j, v, norm));
                    }
                }
                let (j, v, norm) = best.expect("eigenspace dimension <= p");
                used[j] = true;
                basis.push(v / norm);
            }
            for (i, mut b) in basis.into_iter().enumerate() {
                orient(b.as_mut_slice());
                g.set_column(start + i, &b);
            }
        }
        start = end;
    }
}

pub fn spectral(design: &StandardizedDesign) -> Result<SpectralDecomposition> {
    let (n, p) = (design.n, design.p);
    let svd = design.x.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let s_max = svd.singular_values[order[0]];
    let s_min = svd.singular_values[order[p - 1]];
    if !(s_max > 0.0) || s_min < RANK_TOLERANCE * s_max {
        return Err(Error::RankDeficient {
            ratio: if s_max > 0.0 { s_min / s_max } else { 0.0 },
        });
    }

    let mut g = DMatrix::zeros(p, p);
    let mut lambdas = DVector::zeros(p);
    for (k, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = v_t.row(src).iter().copied().collect();
        orient(&mut col);
        g.set_column(k, &DVector::from_vec(col));
        let s = svd.singular_values[src];
        lambdas[k] = s * s;
    }

    canonicalize_repeated(&lambdas, &mut g);

    let mut h = &design.x * &g;
    for k in 0..p {
        let s = lambdas[k].sqrt();
        h.column_mut(k).iter_mut().for_each(|v| *v /= s);
    }
    debug_assert_eq!(h.shape(), (n, p));
    Ok(SpectralDecomposition { lambdas, g, h })
}

/// Uncorrelated components and their significance statistics.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentSummary {
    pub c: Vec<f64>,
    pub rho: Vec<f64>,
    pub r2: f64,
    pub s2: f64,
    pub f: Vec<f64>,
    pub tau: Vec<f64>,
    pub noncentrality_hat: Vec<f64>,
    pub yty: f64,
    pub dfe: usize,
    pub n: usize,
}

impl ComponentSummary {
    pub fn p(&self) -> usize {
        self.rho.len()
    }
}

pub fn components(
    decomp: &SpectralDecomposition,
    design: &StandardizedDesign,
) -> Result<ComponentSummary> {
    let (n, p) = (design.n, design.p);
    let dfe = n as i64 - p as i64 - 1;
    if dfe < 1 {
        return Err(Error::NoResidualDf(dfe));
    }
    let dfe_f = dfe as f64;
    let yty = design.y.dot(&design.y);
    if !(yty > 0.0) {
        return Err(Error::InvalidData("response has zero variation".into()));
    }
    let hty = decomp.h.tr_mul(&design.y);
    let root = yty.sqrt();
    let rho: Vec<f64> = hty.iter().map(|v| v / root).collect();
    let r2: f64 = rho.iter().map(|r| r * r).sum();
    if r2 >= 1.0 - 1e-14 {
        return Err(Error::PerfectFit);
    }
    let c: Vec<f64> = hty
        .iter()
        .zip(decomp.lambdas.iter())
        .map(|(h, l)| h / l.sqrt())
        .collect();
    let resid = 1.0 - r2;
    Ok(ComponentSummary {
        f: rho.iter().map(|r| dfe_f * r * r / resid).collect(),
        tau: rho.iter().map(|r| r * (dfe_f / resid).sqrt()).collect(),
        noncentrality_hat: rho.iter().map(|r| n as f64 * r * r / resid).collect(),
        s2: yty * resid / dfe_f,
        c,
        rho,
        r2,
        yty,
        dfe: dfe as usize,
        n,
    })
}

/// Maps standardized coefficients to raw units; the intercept makes the
/// fitted hyperplane pass through the means.
pub fn back_transform(beta_std: &[f64], design: &StandardizedDesign) -> (Vec<f64>, f64) {
    let beta_raw: Vec<f64> = beta_std
        .iter()
        .zip(design.x_scales.iter())
        .map(|(b, s)| b * design.y_scale / s)
        .collect();
    let intercept = design.y_mean
        - beta_raw
            .iter()
            .zip(design.x_means.iter())
            .map(|(b, m)| b * m)
            .sum::<f64>();
    (beta_raw, intercept)
}

/// A standardized design together with its decomposition and component summary.
#[derive(Debug, Clone)]
pub struct Fit {
    pub design: StandardizedDesign,
    pub decomp: SpectralDecomposition,
    pub comps: ComponentSummary,
}

impl Fit {
    pub fn new(raw: &RawDataset, standardize_y: bool) -> Result<Self> {
        Self::from_design(standardize(raw, standardize_y)?)
    }

    pub fn from_design(design: StandardizedDesign) -> Result<Self> {
        let decomp = spectral(&design)?;
        let comps = components(&decomp, &design)?;
        Ok(Self {
            design,
            decomp,
            comps,
        })
    }

    pub fn n(&self) -> usize {
        self.design.n
    }

    pub fn p(&self) -> usize {
        self.design.p
    }

    pub fn lambdas(&self) -> &[f64] {
        self.decomp.lambdas.as_slice()
    }

    /// `G c`, the OLS solution in standardized units.
    pub fn ols(&self) -> Vec<f64> {
        (&self.decomp.g * DVector::from_column_slice(&self.comps.c))
            .iter()
            .copied()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn raw(cols: &[(&str, &[f64])], response: &str) -> RawDataset {
        RawDataset::new(
            cols.iter().map(|(n, _)| n.to_string()).collect(),
            cols.iter().map(|(_, c)| c.to_vec()).collect(),
            response,
        )
        .unwrap()
    }

    #[test]
    fn parses_small_csv() {
        let d =
            RawDataset::from_csv_reader("x1,x2,y\n1,2,3\n4,5,6\n7,8,10\n".as_bytes(), "y").unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.predictor_names(), vec!["x1", "x2"]);
        assert_eq!(d.response(), &[3.0, 6.0, 10.0]);
    }

    #[test]
    fn blank_cell_names_row_and_column() {
        let err =
            RawDataset::from_csv_reader("x1,x2,y\n1,2,3\n4,,6\n".as_bytes(), "y").unwrap_err();
        match err {
            Error::NonNumeric { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "x2");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn ragged_and_missing_response() {
        let err = RawDataset::from_csv_reader("a,y\n1,2\n3\n".as_bytes(), "y").unwrap_err();
        assert!(matches!(err, Error::Ragged { row: 2, .. }));
        let err = RawDataset::from_csv_reader("a,b\n1,2\n3,4\n".as_bytes(), "y").unwrap_err();
        assert!(err.to_string().contains("\"y\""));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_csv("/nonexistent/file.csv", "y"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn symmetric_column_already_unit_normalized() {
        let d = raw(&[("x", &[1.0, 2.0, 3.0]), ("y", &[4.0, 5.0, 6.0])], "y");
        let s = standardize(&d, true).unwrap();
        assert_eq!(s.x.column(0).as_slice(), &[-1.0, 0.0, 1.0]);
        assert_eq!(s.y.as_slice(), &[-1.0, 0.0, 1.0]);
        assert_abs_diff_eq!(s.y.dot(&s.y), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn constant_predictor_rejected() {
        let d = raw(&[("x", &[7.0, 7.0, 7.0]), ("y", &[1.0, 2.0, 4.0])], "y");
        let err = standardize(&d, true).unwrap_err();
        assert!(err.to_string().contains("zero scale"));
    }

    #[test]
    fn too_many_predictors() {
        let d = raw(
            &[
                ("a", &[1.0, 2.0, 4.0]),
                ("b", &[3.0, 1.0, 2.0]),
                ("c", &[0.0, 5.0, 1.0]),
                ("y", &[1.0, 2.0, 4.0]),
            ],
            "y",
        );
        assert!(matches!(
            standardize(&d, true),
            Err(Error::TooManyPredictors { p: 3, max: 2 })
        ));
    }

    fn design_from(x: DMatrix<f64>, y: Vec<f64>) -> StandardizedDesign {
        StandardizedDesign::from_matrix(&x, &DVector::from_vec(y), false, false, None).unwrap()
    }

    #[test]
    fn orthonormal_columns_give_identity_axes() {
        // centered, mutually orthogonal, unit-norm columns
        let x = DMatrix::from_row_slice(4, 2, &[0.5, 0.5, 0.5, -0.5, -0.5, 0.5, -0.5, -0.5]);
        let d = design_from(x, vec![1.0, 0.0, 2.0, -1.0]);
        let s = spectral(&d).unwrap();
        assert_abs_diff_eq!(s.lambdas[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambdas[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.g, DMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn equicorrelated_pair() {
        // columns with unit norm and inner product 0.5
        let a = [1.0, -1.0, 0.0, 0.0].map(|v: f64| v / 2f64.sqrt());
        let b = [0.0, 0.0, 1.0, -1.0].map(|v: f64| v / 2f64.sqrt());
        let (ca, cb) = (0.5f64, (0.75f64).sqrt());
        let x2: Vec<f64> = a.iter().zip(&b).map(|(u, v)| ca * u + cb * v).collect();
        let x = DMatrix::from_fn(4, 2, |i, j| if j == 0 { a[i] } else { x2[i] });
        let d = design_from(x, vec![1.0, 2.0, -1.0, -2.0]);
        let s = spectral(&d).unwrap();
        assert_abs_diff_eq!(s.lambdas[0], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambdas[1], 0.5, epsilon = 1e-12);
        let r = 0.5f64.sqrt();
        assert_abs_diff_eq!(s.g[(0, 0)], r, epsilon = 1e-12);
        assert_abs_diff_eq!(s.g[(1, 0)], r, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_design_rejected() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0, 5.0, 10.0]);
        let d = StandardizedDesign::from_matrix(
            &x,
            &DVector::from_vec(vec![1.0, 3.0, 2.0, 5.0]),
            true,
            true,
            None,
        )
        .unwrap();
        let err = spectral(&d).unwrap_err();
        assert!(err.to_string().contains("X not full column rank"));
    }

    #[test]
    fn orthogonal_response_has_no_signal() {
        // y orthogonal to both centered columns
        let x = DMatrix::from_row_slice(4, 2, &[0.5, 0.5, 0.5, -0.5, -0.5, 0.5, -0.5, -0.5]);
        let d = design_from(x, vec![1.0, -1.0, -1.0, 1.0]);
        let s = spectral(&d).unwrap();
        let c = components(&s, &d).unwrap();
        assert_eq!(c.dfe, 1);
        for j in 0..2 {
            assert_abs_diff_eq!(c.rho[j], 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(c.c[j], 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(c.f[j], 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(c.r2, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn no_residual_df() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 2.0, 5.0]);
        let d = StandardizedDesign::from_matrix(
            &x,
            &DVector::from_vec(vec![1.0, 3.0, 2.0]),
            true,
            true,
            None,
        )
        .unwrap();
        let s = spectral(&d).unwrap();
        assert!(matches!(components(&s, &d), Err(Error::NoResidualDf(0))));
    }

    #[test]
    fn back_transform_identities() {
        let x = DMatrix::from_row_slice(3, 1, &[-1.0, 0.0, 1.0]);
        let d = design_from(x, vec![-1.0, 0.5, 0.5]);
        assert_eq!(d.x_means[0], 0.0);
        let (b, a) = back_transform(&[0.7], &d);
        assert_eq!(b, vec![0.7]);
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-15);

        let r = raw(
            &[("x", &[1.0, 4.0, 2.0, 8.0]), ("y", &[3.0, 1.0, 4.0, 6.0])],
            "y",
        );
        let s = standardize(&r, true).unwrap();
        let (b, a) = back_transform(&[0.0], &s);
        assert_eq!(b, vec![0.0]);
        assert_abs_diff_eq!(a, 3.5, epsilon = 1e-15);
    }
}
