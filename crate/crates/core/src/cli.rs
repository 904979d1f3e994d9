//! Command-line surface: `fit`, `trace` and `simulate`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::design::{load_csv, Fit};
use crate::error::{Error, Result};
use crate::report::FitReport;
use crate::shrinkage::{PathKind, PathSpec, QGrid};
use crate::simulate::{run_mc, Scenario};
use crate::trace::{build_trace, emit_csv, emit_svg, TraceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Fit OLS, componentwise ML and the best 2-parameter path; write JSON.
    Fit,
    /// Fit, then evaluate a shrinkage path and write CSV/SVG traces.
    Trace,
    /// Run a Monte-Carlo risk comparison from a scenario file.
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Eff,
    Qm,
    Hk,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Maximum-likelihood generalized ridge regression.
#[derive(Debug, Parser)]
#[command(name = "mlridge", version, about)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Headered CSV with numeric columns
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Name of the response column
    #[arg(long)]
    pub response: Option<String>,
    /// Shrinkage path to trace and report
    #[arg(long, value_enum, default_value = "eff")]
    pub path: PathArg,
    /// Smallest q-shape searched [default: -5]
    #[arg(long, allow_negative_numbers = true)]
    pub qmin: Option<f64>,
    /// Largest q-shape searched [default: 5]
    #[arg(long, allow_negative_numbers = true)]
    pub qmax: Option<f64>,
    /// q-shape grid spacing [default: 0.5]
    #[arg(long, allow_negative_numbers = true)]
    pub qstep: Option<f64>,
    /// Trace grid points per unit of m
    #[arg(long, default_value_t = PathSpec::DEFAULT_STEPS as i64, allow_negative_numbers = true)]
    pub steps: i64,
    /// Keep the response in raw units (only centered)
    #[arg(long)]
    pub no_standardize_y: bool,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Random seed (simulate only)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scenario JSON file (simulate only)
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Artifact formats to write [default: all]
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub data: Option<PathBuf>,
    pub response: Option<String>,
    pub path: PathArg,
    pub qgrid: QGrid,
    qgrid_overridden: bool,
    pub steps: usize,
    pub standardize_y: bool,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub scenario: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl RunConfig {
    /// Checks every constraint and reports all violations together.
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let mut problems = Vec::new();
        let defaults = QGrid::default();
        let qgrid = QGrid {
            qmin: cli.qmin.unwrap_or(defaults.qmin),
            qmax: cli.qmax.unwrap_or(defaults.qmax),
            qstep: cli.qstep.unwrap_or(defaults.qstep),
        };
        if !(qgrid.qmin < qgrid.qmax) {
            problems.push(format!(
                "--qmin ({}) must be below --qmax ({})",
                qgrid.qmin, qgrid.qmax
            ));
        }
        if !(qgrid.qstep > 0.0) {
            problems.push(format!("--qstep ({}) must be positive", qgrid.qstep));
        }
        if cli.steps < 1 {
            problems.push(format!("--steps ({}) must be at least 1", cli.steps));
        }
        match cli.command {
            Command::Fit | Command::Trace => {
                if cli.data.is_none() {
                    problems.push("--data is required".into());
                }
                if cli.response.is_none() {
                    problems.push("--response is required".into());
                }
                if cli.seed.is_some() {
                    problems.push("--seed is only valid for simulate".into());
                }
                if cli.scenario.is_some() {
                    problems.push("--scenario is only valid for simulate".into());
                }
            }
            Command::Simulate => {
                if cli.seed.is_none() {
                    problems.push("--seed is required for simulate".into());
                }
                if cli.scenario.is_none() {
                    problems.push("--scenario is required for simulate".into());
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::InvalidArgument(problems.join("; ")));
        }
        let mut formats = cli.format;
        if formats.is_empty() {
            formats = vec![Format::Csv, Format::Json, Format::Svg];
        }
        formats.sort();
        formats.dedup();
        Ok(Self {
            command: cli.command,
            data: cli.data,
            response: cli.response,
            path: cli.path,
            qgrid,
            qgrid_overridden: cli.qmin.is_some() || cli.qmax.is_some() || cli.qstep.is_some(),
            steps: cli.steps as usize,
            standardize_y: !cli.no_standardize_y,
            out: cli.out,
            seed: cli.seed,
            scenario: cli.scenario,
            formats,
        })
    }

    pub fn path_spec(&self) -> PathSpec {
        let kind = match self.path {
            PathArg::Eff => PathKind::Efficient,
            PathArg::Qm => PathKind::Qm {
                q: None,
                grid: self.qgrid,
            },
            PathArg::Hk => PathKind::HoerlKennard,
            PathArg::Uniform => PathKind::Uniform,
        };
        PathSpec::new(kind).with_steps(self.steps)
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Executes a run and returns the written artifacts.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let mut written = Vec::new();
    match config.command {
        Command::Fit | Command::Trace => {
            let data = config.data.as_ref().expect("validated");
            let response = config.response.as_deref().expect("validated");
            let raw = load_csv(data, response)?;
            let fit = Fit::new(&raw, config.standardize_y)?;
            let spec = config.path_spec();
            let report = FitReport::new(&fit, &spec, &config.qgrid)?;

            if config.command == Command::Fit || config.wants(Format::Json) {
                let p = config.out.join("fit.json");
                write(&p, &report.to_json()?)?;
                written.push(p);
            }
            if config.command == Command::Trace {
                let table = build_trace(&fit.design, &fit.decomp, &fit.comps, &spec)?;
                let label = spec.kind.label();
                if config.wants(Format::Csv) {
                    let p = config.out.join(format!("trace_{label}.csv"));
                    emit_csv(&table, &p)?;
                    written.push(p);
                }
                if config.wants(Format::Svg) {
                    for kind in TraceKind::ALL {
                        let p = config
                            .out
                            .join(format!("trace_{label}_{}.svg", kind.name()));
                        match emit_svg(&table, kind, &p) {
                            Ok(()) => written.push(p),
                            Err(Error::TraceUnavailable(name, why)) => {
                                eprintln!("skipping {name} trace: {why}");
                            }
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
        Command::Simulate => {
            let path = config.scenario.as_ref().expect("validated");
            let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let mut scenario: Scenario = serde_json::from_str(&body)?;
            scenario.seed = config.seed.expect("validated");
            if config.qgrid_overridden {
                scenario.qgrid = config.qgrid;
            }
            let report = run_mc(&scenario)?;
            let csv = config
                .wants(Format::Csv)
                .then(|| config.out.join("risk_report.csv"));
            let json = config
                .wants(Format::Json)
                .then(|| config.out.join("risk_report.json"));
            report.write(csv.as_deref(), json.as_deref())?;
            written.extend(csv);
            written.extend(json);
        }
    }
    Ok(written)
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = RunConfig::from_cli(cli).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
