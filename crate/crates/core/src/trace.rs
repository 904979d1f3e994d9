//! TRACE diagnostics: path evaluation over an `m`-grid, the likelihood-ratio
//! profile, and CSV/SVG emission.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::design::{ComponentSummary, SpectralDecomposition, StandardizedDesign};
use crate::error::{Error, Result};
use crate::risk::{inferior_direction, relative_mse};
use crate::shrinkage::{
    efficient_path_deltas, grr_estimate, ml_components, qm_search, two_param_at_extent,
    DeltaVector, MLComponentFit, PathKind, PathSpec, QGrid, QMSolution,
};

/// The five per-coefficient or per-component series of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Coef,
    Rmse,
    Spat,
    Exev,
    Infd,
}

impl TraceKind {
    pub const ALL: [TraceKind; 5] = [
        TraceKind::Coef,
        TraceKind::Rmse,
        TraceKind::Spat,
        TraceKind::Exev,
        TraceKind::Infd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TraceKind::Coef => "coef",
            TraceKind::Rmse => "rmse",
            TraceKind::Spat => "spat",
            TraceKind::Exev => "exev",
            TraceKind::Infd => "infd",
        }
    }

    fn title(self) -> &'static str {
        match self {
            TraceKind::Coef => "Shrunken coefficients",
            TraceKind::Rmse => "Relative MSE",
            TraceKind::Spat => "Shrinkage pattern (delta factors)",
            TraceKind::Exev => "Excess eigenvalues",
            TraceKind::Infd => "Inferior direction cosines",
        }
    }

    /// Whether the series index a β-coefficient (vs. a principal axis).
    fn per_coefficient(self) -> bool {
        matches!(self, TraceKind::Coef | TraceKind::Rmse | TraceKind::Infd)
    }
}

impl FromStr for TraceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TraceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownTrace(s.to_owned()))
    }
}

/// ML fit summarizing the path: the efficient-path knot or the best q-shape.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum PathSummary {
    Efficient(MLComponentFit),
    Qm(QMSolution),
}

/// A shrinkage path evaluated on an ascending `m`-grid from 0 to `p`.
#[derive(Debug, Clone)]
pub struct TraceTable {
    pub path: PathSpec,
    pub predictor_names: Vec<String>,
    pub m_grid: Vec<f64>,
    pub coef: Vec<Vec<f64>>,
    pub rmse: Vec<Vec<f64>>,
    pub spat: Vec<Vec<f64>>,
    pub exev: Vec<Vec<f64>>,
    pub infd: Vec<Vec<f64>>,
    /// `-2 log LR` of each grid point being MSE-optimal.
    pub lrat: Vec<f64>,
    pub m_ml: f64,
    pub summary: PathSummary,
    /// Why `rmse`/`exev` hold NaN, when relative risk is undefined.
    pub risk_status: Option<String>,
}

impl TraceTable {
    pub fn p(&self) -> usize {
        self.predictor_names.len()
    }

    pub fn series(&self, kind: TraceKind) -> &[Vec<f64>] {
        match kind {
            TraceKind::Coef => &self.coef,
            TraceKind::Rmse => &self.rmse,
            TraceKind::Spat => &self.spat,
            TraceKind::Exev => &self.exev,
            TraceKind::Infd => &self.infd,
        }
    }

    /// Row index of the ML vertical line.
    pub fn ml_row(&self) -> usize {
        self.m_grid
            .iter()
            .position(|m| *m == self.m_ml)
            .expect("m_ml is always a grid point")
    }
}

/// Resolved path: how to get δ(m) and where the ML point lies.
pub(crate) struct ResolvedPath {
    pub summary: PathSummary,
    pub q: Option<f64>,
    pub m_ml: f64,
}

impl ResolvedPath {
    pub fn new(
        kind: &PathKind,
        comps: &ComponentSummary,
        lambdas: &[f64],
        n: usize,
    ) -> Result<Self> {
        match kind {
            PathKind::Efficient => {
                let fit = ml_components(comps, n)?;
                Ok(Self {
                    m_ml: fit.m_knot,
                    q: None,
                    summary: PathSummary::Efficient(fit),
                })
            }
            other => {
                let grid = match (other, other.fixed_q()) {
                    (_, Some(q)) => QGrid::single(q),
                    (PathKind::Qm { grid, .. }, None) => *grid,
                    _ => unreachable!("efficient handled above"),
                };
                let sol = qm_search(comps, lambdas, n, &grid)?;
                Ok(Self {
                    m_ml: sol.m_star,
                    q: Some(sol.q_star),
                    summary: PathSummary::Qm(sol),
                })
            }
        }
    }

    pub fn deltas_at(&self, m: f64, lambdas: &[f64]) -> Result<DeltaVector> {
        match (&self.summary, self.q) {
            (PathSummary::Efficient(fit), _) => efficient_path_deltas(m, fit),
            (PathSummary::Qm(_), Some(q)) => two_param_at_extent(m, q, lambdas),
            (PathSummary::Qm(_), None) => unreachable!("qm paths carry a shape"),
        }
    }
}

/// Uniform grid `i / steps` on `[0, p]` with `extra` points merged in.
pub fn m_grid(p: usize, steps: usize, extra: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=p * steps).map(|i| i as f64 / steps as f64).collect();
    grid.extend(
        extra
            .iter()
            .copied()
            .filter(|m| (0.0..=p as f64).contains(m)),
    );
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

pub fn build_trace(
    design: &StandardizedDesign,
    decomp: &SpectralDecomposition,
    comps: &ComponentSummary,
    path: &PathSpec,
) -> Result<TraceTable> {
    path.validate()?;
    let (n, p) = (design.n, design.p);
    let lambdas = decomp.lambdas.as_slice();
    let resolved = ResolvedPath::new(&path.kind, comps, lambdas, n)?;
    let grid = m_grid(p, path.grid_steps_per_unit_m, &[resolved.m_ml]);

    let risk_status = relative_mse(&DeltaVector::identity(p), comps, lambdas, n)
        .err()
        .map(|e| e.to_string());

    struct Row {
        coef: Vec<f64>,
        rmse: Vec<f64>,
        spat: Vec<f64>,
        exev: Vec<f64>,
        infd: Vec<f64>,
        lrat: f64,
    }

    let rows: Vec<Row> = grid
        .par_iter()
        .map(|&m| -> Result<Row> {
            let delta = resolved.deltas_at(m, lambdas)?;
            let coef = grr_estimate(decomp, comps, &delta);
            let (rmse, exev, infd) = if risk_status.is_none() {
                let risk = relative_mse(&delta, comps, lambdas, n)?;
                let rmse = (0..p)
                    .map(|j| {
                        (0..p)
                            .map(|i| decomp.g[(j, i)].powi(2) * risk.diag_clamped[i])
                            .sum()
                    })
                    .collect();
                let exev = (0..p)
                    .map(|i| 1.0 / lambdas[i] - risk.diag_clamped[i])
                    .collect();
                let inf = inferior_direction(&delta, &risk, lambdas, &decomp.g);
                (rmse, exev, inf.direction.unwrap_or_else(|| vec![0.0; p]))
            } else {
                (vec![f64::NAN; p], vec![f64::NAN; p], vec![0.0; p])
            };
            Ok(Row {
                lrat: profile_point(comps, lambdas, n, &delta.deltas),
                coef,
                rmse,
                spat: delta.deltas,
                exev,
                infd,
            })
        })
        .collect::<Result<_>>()?;

    let mut table = TraceTable {
        path: *path,
        predictor_names: design.predictor_names.clone(),
        m_grid: grid,
        coef: Vec::with_capacity(rows.len()),
        rmse: Vec::with_capacity(rows.len()),
        spat: Vec::with_capacity(rows.len()),
        exev: Vec::with_capacity(rows.len()),
        infd: Vec::with_capacity(rows.len()),
        lrat: Vec::with_capacity(rows.len()),
        m_ml: resolved.m_ml,
        summary: resolved.summary,
        risk_status,
    };
    for r in rows {
        table.coef.push(r.coef);
        table.rmse.push(r.rmse);
        table.spat.push(r.spat);
        table.exev.push(r.exev);
        table.infd.push(r.infd);
        table.lrat.push(r.lrat);
    }
    Ok(table)
}

/// `-2 log LR` that the δ-factors are MSE-optimal, against the unrestricted
/// ML fit. `γ` is recovered from δ up to the common σ, with signs matched to
/// `ρ`, and the likelihood is maximized over σ. Any `δ_i = 1` forces `σ = 0`,
/// so the value there is `+∞`.
pub fn profile_point(comps: &ComponentSummary, lambdas: &[f64], n: usize, deltas: &[f64]) -> f64 {
    if deltas.iter().any(|d| *d >= 1.0) {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let a = comps.yty;
    // w_i = |γ_i| / σ
    let mut b = 0.0;
    let mut c = 0.0;
    for ((d, r), l) in deltas.iter().zip(&comps.rho).zip(lambdas) {
        let odds = d / (1.0 - d);
        let w = (odds / l).sqrt();
        b += r.abs() * l.sqrt() * w;
        c += odds;
    }
    b *= a.sqrt();
    // minimize n ln σ² + (A - 2bσ + cσ²)/σ² over t = 1/σ
    let t = (b + (b * b + 4.0 * a * nf).sqrt()) / (2.0 * a);
    let restricted = -2.0 * nf * t.ln() + a * t * t - 2.0 * b * t + c;
    let sigma2 = a * (1.0 - comps.r2) / nf;
    let unrestricted = nf * sigma2.ln() + nf;
    (restricted - unrestricted).max(0.0)
}

/// `(m, -2 log LR)` along a path at the given extents.
pub fn likelihood_profile(
    comps: &ComponentSummary,
    decomp: &SpectralDecomposition,
    n: usize,
    path: &PathSpec,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let lambdas = decomp.lambdas.as_slice();
    let resolved = ResolvedPath::new(&path.kind, comps, lambdas, n)?;
    grid.iter()
        .map(|&m| {
            let d = resolved.deltas_at(m, lambdas)?;
            Ok((m, profile_point(comps, lambdas, n, &d.deltas)))
        })
        .collect()
}

/// `%g`-style formatting with `sig` significant digits.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_owned()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_header(p: usize) -> Vec<String> {
    let mut h = vec!["m".to_owned()];
    for kind in TraceKind::ALL {
        h.extend((1..=p).map(|j| format!("{}_{j}", kind.name())));
    }
    h.push("lrat".to_owned());
    h
}

pub fn render_csv(table: &TraceTable) -> String {
    let mut out = csv_header(table.p()).join(",");
    out.push('\n');
    for (row, m) in table.m_grid.iter().enumerate() {
        let mut fields = vec![fmt_sig(*m, 12)];
        for kind in TraceKind::ALL {
            fields.extend(table.series(kind)[row].iter().map(|v| fmt_sig(*v, 12)));
        }
        fields.push(fmt_sig(table.lrat[row], 12));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv(table: &TraceTable, out: impl AsRef<Path>) -> Result<()> {
    let out = out.as_ref();
    fs::write(out, render_csv(table)).map_err(|e| Error::io(out, e))
}

const PALETTE: [&str; 8] = [
    "#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b",
];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

pub fn render_svg(table: &TraceTable, which: TraceKind) -> Result<String> {
    if matches!(which, TraceKind::Rmse | TraceKind::Exev) {
        if let Some(status) = &table.risk_status {
            return Err(Error::TraceUnavailable(which.name(), status.clone()));
        }
    }
    let p = table.p();
    let series = table.series(which);
    let pf = p as f64;
    let (mut lo, mut hi) = series
        .iter()
        .flatten()
        .filter(|v| v.is_finite())
        .fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    if hi - lo < 1e-12 {
        hi += 1.0;
        lo -= 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |m: f64| LEFT + m / pf * plot_w;
    let sy = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.2}" y="22" font-family="sans-serif" font-size="15" text-anchor="middle">{} ({} path)</text>"#,
        LEFT + plot_w / 2.0,
        which.title(),
        table.path.kind.label()
    );

    // axes box and ticks
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#444444" stroke-width="1"/>"##
    );
    for i in 0..=p {
        let x = sx(i as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444444"/><text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{i}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0
        );
    }
    let step = nice_step(hi - lo);
    let mut tick = (lo / step).ceil() * step;
    while tick <= hi {
        let y = sy(tick);
        let label = fmt_sig(if tick.abs() < step * 1e-9 { 0.0 } else { tick }, 6);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="#444444"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{label}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
        tick += step;
    }
    if lo < 0.0 && hi > 0.0 {
        let y = sy(0.0);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#bbbbbb" stroke-width="0.5"/>"##,
            LEFT + plot_w
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">m</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        which.name()
    );

    for j in 0..p {
        let color = PALETTE[j % PALETTE.len()];
        let points: Vec<String> = table
            .m_grid
            .iter()
            .zip(series)
            .filter(|(_, row)| row[j].is_finite())
            .map(|(m, row)| format!("{:.2},{:.2}", sx(*m), sy(row[j])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#,
            points.join(" ")
        );
        let label = if which.per_coefficient() {
            table.predictor_names[j].clone()
        } else {
            format!("axis {}", j + 1)
        };
        let ly = TOP + 14.0 + 18.0 * j as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="14" height="3" fill="{color}"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
            ly - 4.0,
            lx + 20.0,
            ly,
            xml_escape(&label)
        );
    }

    let x = sx(table.m_ml);
    let _ = writeln!(
        s,
        r##"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="#555555" stroke-width="1.2" stroke-dasharray="6,4"/>"##,
        TOP + plot_h
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn emit_svg(table: &TraceTable, which: TraceKind, out: impl AsRef<Path>) -> Result<()> {
    let out = out.as_ref();
    fs::write(out, render_svg(table, which)?).map_err(|e| Error::io(out, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0, 12), "0");
        assert_eq!(fmt_sig(1.5, 12), "1.5");
        assert_eq!(fmt_sig(-2.0, 12), "-2");
        assert_eq!(fmt_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(fmt_sig(123456.789, 12), "123456.789");
        assert_eq!(fmt_sig(1.23456789e-7, 12), "1.23456789e-7");
        assert_eq!(fmt_sig(6.02e23, 12), "6.02e23");
        assert_eq!(fmt_sig(f64::NAN, 12), "NaN");
        assert_eq!(fmt_sig(f64::INFINITY, 12), "inf");
        for v in [1.234567890123456, -0.000123456789012345, 98765.4321] {
            let back: f64 = fmt_sig(v, 12).parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-11);
        }
    }

    #[test]
    fn trace_kind_parsing() {
        assert_eq!("exev".parse::<TraceKind>().unwrap(), TraceKind::Exev);
        assert!(matches!(
            "lasso".parse::<TraceKind>(),
            Err(Error::UnknownTrace(_))
        ));
    }

    #[test]
    fn grid_merges_extra_points() {
        let g = m_grid(2, 4, &[1.3, 0.5, 2.5]);
        assert_eq!(g.len(), 10);
        assert!(g.contains(&1.3));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*g.last().unwrap(), 2.0);
    }

    #[test]
    fn header_column_count() {
        assert_eq!(csv_header(4).len(), 22);
        assert_eq!(csv_header(4)[1], "coef_1");
        assert_eq!(csv_header(4)[21], "lrat");
    }
}
