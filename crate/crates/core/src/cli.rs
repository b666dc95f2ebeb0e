//! Command-line front end. `run` parses arguments, dispatches, and renders a
//! table as CSV or JSON; `main` only forwards the exit status.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::asymptotics::{decade_sequence, run_limit, run_ratio, LimitExperiment, Probe};
use crate::automorphism::{sweep, Family, Law, DEFAULT_SEED};
use crate::domain::{cvec, CVector, DomainSpec, NumericConfig, PointDir};
use crate::error::{LabError, Result};
use crate::fefferman::{bordered_det, density, DefiningFunctionProbe, HFactor, ProbeMode};
use crate::kernels::{KernelEvaluator, KernelKind};
use crate::metrics::{e_quantity, e_quantity_log_sk, metric, sk_function, MetricKind};
use crate::quadkernel::{build_bergman, build_szego, CurveSpec, Polynomial, Region};
use crate::variational::{variational_metric, BasisFrame};

pub const SEED_ENV: &str = "SZEGO_LAB_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ARGUMENT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "szego-lab",
    version,
    about = "Szegő and Bergman kernels, invariant metrics and their transformation laws"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized checks (decimal or 0x-hex); overrides SZEGO_LAB_SEED.
    #[arg(long, value_parser = parse_seed, global = true)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct NumericArgs {
    /// Planar boundary-measure constant c₁.
    #[arg(long, global = true)]
    pub c1: Option<f64>,
    /// Boundary-measure constant c_n for n ≥ 2.
    #[arg(long, global = true)]
    pub cn: Option<f64>,
    /// Minimum series cutoff for annulus kernels.
    #[arg(long, global = true)]
    pub series_cutoff: Option<usize>,
    /// Finite-difference step.
    #[arg(long, global = true)]
    pub fd_step: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate S(z,w) or K(z,w).
    Kernel {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value = "szego")]
        kind: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Defaults to z.
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
    },
    /// Evaluate an invariant metric F(z,ξ).
    Metric {
        #[arg(long)]
        which: String,
        #[arg(long)]
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        /// `hessian` or `variational`.
        #[arg(long, default_value = "hessian")]
        method: String,
    },
    /// Evaluate SK(z,w) = S^{n+1}/Kⁿ, and E(z,ξ) when a direction is given.
    Sk {
        #[arg(long)]
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<String>,
    },
    /// Fefferman density at a boundary point of the ball.
    Fefferman {
        #[arg(long)]
        dimension: usize,
        /// `ball`, `scaled-ball:<s>` or `perturbed-ball:h1|h2|h3`.
        #[arg(long, default_value = "ball")]
        defining: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// `analytic` or `fd`.
        #[arg(long, default_value = "analytic")]
        mode: String,
    },
    /// Randomized transformation-law sweeps.
    Check {
        /// `szego`, `bergman`, `metric`, `sk`, `pullback` or `all`.
        #[arg(long, default_value = "all")]
        law: String,
        #[arg(long, default_value_t = 100)]
        draws: u64,
    },
    /// Metric limits on thin annuli.
    AnnulusLimits {
        /// `sqrt` or `fifth`.
        #[arg(long)]
        probe: String,
        /// `szego` or `bergman`; ignored with --ratio.
        #[arg(long, default_value = "szego")]
        metric: String,
        /// r = 10^{-k}, k = 1..=decades.
        #[arg(long)]
        decades: Option<usize>,
        /// Tabulate F_S/F_B instead.
        #[arg(long)]
        ratio: bool,
    },
    /// Kernel from quadrature and Gram orthonormalization.
    Quadkernel {
        /// Boundary curve for a Szegő kernel: `circle`, `annulus:<r>`, `ellipse:<a>,<b>`, `warped-circle:<w>`.
        #[arg(long, conflicts_with = "region")]
        curve: Option<String>,
        /// Region for a Bergman kernel: `disk` or `annulus:<r>`.
        #[arg(long)]
        region: Option<String>,
        /// Exponent range `lo..hi`.
        #[arg(long, allow_hyphen_values = true)]
        degrees: String,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
        /// Report the reproducing residual of z^k.
        #[arg(long, allow_hyphen_values = true)]
        test_power: Option<i32>,
    },
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse::<u64>(),
    };
    parsed.map_err(|_| format!("invalid seed '{s}'"))
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| LabError::Argument(format!("invalid number '{s}'")))?;
    if !v.is_finite() {
        return Err(LabError::Argument(format!("non-finite number '{s}'")));
    }
    Ok(v)
}

/// `re` or `re,im`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse_f64(re)?, parse_f64(im)?)),
        None => Ok(Complex64::new(parse_f64(s)?, 0.0)),
    }
}

/// Components separated by `;`, each `re` or `re,im`. Without `;`, a list of
/// exactly `n ≥ 2` comma-separated numbers is read as real components.
pub fn parse_vector(s: &str, n: usize) -> Result<CVector> {
    let parts: Vec<Complex64> = if s.contains(';') {
        s.split(';').map(parse_complex).collect::<Result<_>>()?
    } else {
        let fields: Vec<&str> = s.split(',').collect();
        if n >= 2 && fields.len() == n {
            fields
                .iter()
                .map(|f| Ok(Complex64::new(parse_f64(f)?, 0.0)))
                .collect::<Result<_>>()?
        } else {
            vec![parse_complex(s)?]
        }
    };
    if parts.len() != n {
        return Err(LabError::DimensionMismatch {
            expected: n,
            got: parts.len(),
        });
    }
    Ok(cvec(&parts))
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<i32>> {
    let bad = || LabError::Argument(format!("invalid degree range '{s}' (expected lo..hi)"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: i32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i32 = hi.trim().parse().map_err(|_| bad())?;
    Ok(lo..=hi)
}

/// Shortest round-trip decimal, switching to exponent form for tiny and huge values.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// A table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Complex(Complex64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Complex64> for Cell {
    fn from(v: Complex64) -> Self {
        Cell::Complex(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Output of one command: metadata, named columns, rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub failed: bool,
}

impl Report {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    fn row(&mut self, cells: Vec<Cell>) {
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        // complex columns split into _re/_im
        let complex_col: Vec<bool> = (0..self.columns.len())
            .map(|j| self.rows.iter().any(|r| matches!(r.get(j), Some(Cell::Complex(_)))))
            .collect();
        let header: Vec<String> = self
            .columns
            .iter()
            .zip(&complex_col)
            .map(|(c, &cx)| if cx { format!("{c}_re,{c}_im") } else { c.clone() })
            .collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&complex_col)
                .map(|(cell, &cx)| match cell {
                    Cell::Real(v) if cx => format!("{},0.0", fmt_f64(*v)),
                    Cell::Real(v) => fmt_f64(*v),
                    Cell::Complex(z) => format!("{},{}", fmt_f64(z.re), fmt_f64(z.im)),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(t) => t.clone(),
                    Cell::Bool(b) => b.to_string(),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let meta: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, cell)| {
                        let v = match cell {
                            Cell::Real(v) => json!(v),
                            Cell::Complex(z) => json!({"re": z.re, "im": z.im}),
                            Cell::Int(i) => json!(i),
                            Cell::Text(t) => json!(t),
                            Cell::Bool(b) => json!(b),
                        };
                        (c.clone(), v)
                    })
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({"metadata": meta, "rows": rows})).expect("serializable");
        s.push('\n');
        s
    }
}

fn config_from(args: &NumericArgs) -> Result<NumericConfig> {
    let mut c = NumericConfig::default();
    if let Some(v) = args.c1 {
        c.c1 = v;
    }
    if let Some(v) = args.cn {
        c.cn = v;
    }
    if let Some(v) = args.series_cutoff {
        c.series_cutoff = v;
    }
    if let Some(v) = args.fd_step {
        c.fd_step = v;
    }
    if !(c.c1 > 0.0 && c.cn > 0.0) {
        return Err(LabError::Argument("measure constants must be positive".into()));
    }
    c.validate()?;
    Ok(c)
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => parse_seed(&v).map_err(LabError::Argument),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn dispatch(cli: &Cli) -> Result<Report> {
    let config = config_from(&cli.numeric)?;
    let seed = resolve_seed(cli.seed)?;
    let mut report = match &cli.command {
        Command::Kernel { domain, kind, z, w } => {
            let domain: DomainSpec = domain.parse()?;
            let kind: KernelKind = kind.parse()?;
            let n = domain.dimension();
            let z = parse_vector(z, n)?;
            let w = match w {
                Some(w) => parse_vector(w, n)?,
                None => z.clone(),
            };
            let value = KernelEvaluator::new(domain.clone(), kind, config)?.eval(&z, &w)?;
            let mut r = Report::new(&["domain", "kind", "value"]);
            r.row(vec![domain.to_string().into(), kind.to_string().into(), value.into()]);
            r
        }
        Command::Metric {
            which,
            domain,
            z,
            xi,
            method,
        } => {
            let domain: DomainSpec = domain.parse()?;
            let which: MetricKind = which.parse()?;
            let n = domain.dimension();
            let at = PointDir::new(parse_vector(z, n)?, parse_vector(xi, n)?)?;
            let value = match method.as_str() {
                "hessian" => metric(&domain, which, &at, config)?,
                "variational" => {
                    let kind = match which {
                        MetricKind::Szego => KernelKind::Szego,
                        MetricKind::Bergman => KernelKind::Bergman,
                        MetricKind::Caratheodory => {
                            return Err(LabError::Capability(
                                "no variational route for the Carathéodory metric".into(),
                            ))
                        }
                    };
                    variational_metric(&BasisFrame::adapted(domain.clone(), kind, &at.z, config)?, &at)?
                }
                other => return Err(LabError::Argument(format!("unknown method '{other}'"))),
            };
            let mut r = Report::new(&["domain", "metric", "method", "value"]);
            r.row(vec![
                domain.to_string().into(),
                which.to_string().into(),
                method.as_str().into(),
                value.value().into(),
            ]);
            r
        }
        Command::Sk { domain, z, w, xi } => {
            let domain: DomainSpec = domain.parse()?;
            let n = domain.dimension();
            let z = parse_vector(z, n)?;
            let w = match w {
                Some(w) => parse_vector(w, n)?,
                None => z.clone(),
            };
            let sk = sk_function(&domain, &z, &w, config)?;
            match xi {
                Some(xi) => {
                    let at = PointDir::new(z, parse_vector(xi, n)?)?;
                    let direct = e_quantity(&domain, &at, config)?;
                    let via_log = e_quantity_log_sk(&domain, &at, config)?;
                    let mut r = Report::new(&["domain", "sk", "e", "e_log_sk"]);
                    r.row(vec![
                        domain.to_string().into(),
                        sk.into(),
                        direct.into(),
                        via_log.into(),
                    ]);
                    r
                }
                None => {
                    let mut r = Report::new(&["domain", "sk"]);
                    r.row(vec![domain.to_string().into(), sk.into()]);
                    r
                }
            }
        }
        Command::Fefferman {
            dimension,
            defining,
            z,
            mode,
        } => {
            let factor: HFactor = defining.parse()?;
            let mode = match mode.as_str() {
                "analytic" => ProbeMode::Analytic,
                "fd" => ProbeMode::FiniteDifference { step: config.fd_step },
                other => return Err(LabError::Argument(format!("unknown mode '{other}'"))),
            };
            let probe = DefiningFunctionProbe::new(*dimension, factor, mode)?;
            let z = parse_vector(z, *dimension)?;
            let projected = probe.project_to_boundary(&z)?;
            let det = bordered_det(&probe, &projected)?;
            let value = density(&probe, &z, config)?;
            let mut r = Report::new(&["defining", "dimension", "bordered_det", "density"]);
            r.row(vec![
                factor.to_string().into(),
                Cell::Int(*dimension as i64),
                det.into(),
                value.value().into(),
            ]);
            r
        }
        Command::Check { law, draws } => {
            let laws: Vec<Law> = if law == "all" {
                Law::ALL.to_vec()
            } else {
                vec![law.parse()?]
            };
            if *draws == 0 {
                return Err(LabError::Argument("draws must be positive".into()));
            }
            let mut r = Report::new(&["law", "family", "draws", "max_residual", "tolerance", "pass"]);
            r.meta("seed", format!("{seed:#x}"));
            let mut failed = false;
            for law in laws {
                for family in Family::ALL {
                    let residual = sweep(law, family, seed, *draws, config)?;
                    let tol = family.tolerance();
                    let pass = residual <= tol;
                    failed |= !pass;
                    r.row(vec![
                        law.to_string().into(),
                        family.to_string().into(),
                        Cell::Int(*draws as i64),
                        residual.into(),
                        tol.into(),
                        pass.into(),
                    ]);
                }
            }
            r.failed = failed;
            r
        }
        Command::AnnulusLimits {
            probe,
            metric,
            decades,
            ratio,
        } => {
            let probe: Probe = probe.parse()?;
            let decades = decades.unwrap_or_else(|| probe.default_decades());
            if *ratio {
                if decades == 0 || decades > 12 {
                    return Err(LabError::Argument(format!("decades must lie in 1..=12, got {decades}")));
                }
                let rows = run_ratio(probe, &decade_sequence(decades), config)?;
                let mut r = Report::new(&["r", "z", "ratio"]);
                r.meta("probe", probe);
                for row in rows {
                    r.row(vec![row.r.into(), row.z.into(), row.ratio.into()]);
                }
                r
            } else {
                let kind: KernelKind = metric.parse()?;
                let experiment = LimitExperiment::standard(kind, probe, decades)?;
                let table = run_limit(&experiment, config)?;
                let tolerance = match probe {
                    Probe::Sqrt => 5e-3,
                    Probe::FifthRoot => 1e-2,
                };
                let mut r = Report::new(&["r", "z", "raw_F", "normalized", "expected", "abs_error"]);
                r.meta("metric", kind)
                    .meta("probe", probe)
                    .meta("normalization", experiment.normalization);
                r.meta("series_cutoff", config.series_cutoff)
                    .meta("tolerance", tolerance);
                match (table.extrapolated, table.rate) {
                    (Some(x), Some(rate)) => {
                        r.meta("aitken_limit", x).meta("fitted_rate", rate);
                    }
                    _ => {
                        r.meta("aitken_limit", "none");
                    }
                }
                r.meta("cauchy_tail", table.cauchy_tail());
                r.meta(
                    "note",
                    "tolerances rest on empirical rate fitting of the last three rows",
                );
                for row in &table.rows {
                    r.row(vec![
                        row.r.into(),
                        row.z.into(),
                        row.raw.into(),
                        row.normalized.into(),
                        row.expected.into(),
                        row.abs_error.into(),
                    ]);
                }
                r.failed = table.last().abs_error > tolerance;
                r
            }
        }
        Command::Quadkernel {
            curve,
            region,
            degrees,
            nodes,
            z,
            w,
            test_power,
        } => {
            let degrees = parse_range(degrees)?;
            let z = parse_complex(z)?;
            let w = match w {
                Some(w) => parse_complex(w)?,
                None => z,
            };
            let (label, kernel) = match (curve, region) {
                (Some(c), None) => {
                    let mut spec: CurveSpec = c.parse()?;
                    if let Some(m) = nodes {
                        spec = spec.with_nodes(*m)?;
                    }
                    (format!("szego {spec}"), build_szego(&spec, degrees)?)
                }
                (None, Some(reg)) => {
                    let region = match reg.split_once(':') {
                        None if reg == "disk" => Region::Disk,
                        Some(("annulus", r)) => Region::Annulus { inner: parse_f64(r)? },
                        _ => return Err(LabError::Argument(format!("unknown region '{reg}'"))),
                    };
                    let angular = nodes.unwrap_or(crate::quadkernel::DEFAULT_NODES);
                    (
                        format!("bergman {reg}"),
                        build_bergman(region, degrees, angular / 4, angular)?,
                    )
                }
                _ => return Err(LabError::Argument("give exactly one of --curve or --region".into())),
            };
            let mut r = Report::new(&["kernel", "value", "gram_residual", "condition", "reproducing_residual"]);
            let reproducing = match test_power {
                Some(k) => Cell::Real(kernel.reproducing_residual(&Polynomial::monomial(*k), z)?),
                None => Cell::Text(String::new()),
            };
            r.row(vec![
                label.into(),
                kernel.eval(z, w).into(),
                kernel.gram_residual().into(),
                kernel.condition().into(),
                reproducing,
            ]);
            r
        }
    };
    if !matches!(cli.command, Command::Check { .. }) {
        report.metadata.insert(0, ("seed".into(), format!("{seed:#x}")));
    }
    Ok(report)
}

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn exit_code(err: &LabError) -> i32 {
    if err.is_argument_error() {
        EXIT_ARGUMENT
    } else {
        EXIT_NUMERIC
    }
}

/// Parse `args` (including the program name) and run.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ARGUMENT } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let report = match dispatch(&cli) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                code: exit_code(&e),
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let body = match cli.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    let code = if report.failed { EXIT_CHECK_FAILED } else { EXIT_OK };
    let stderr = if report.failed {
        "check failed: residual above tolerance\n".to_string()
    } else {
        String::new()
    };
    match &cli.out {
        Some(path) => match std::fs::write(path, &body) {
            Ok(()) => Outcome {
                code,
                stdout: String::new(),
                stderr,
            },
            Err(e) => Outcome {
                code: EXIT_ARGUMENT,
                stdout: String::new(),
                stderr: format!("error: cannot write {}: {e}\n", path.display()),
            },
        },
        None => Outcome {
            code,
            stdout: body,
            stderr,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_forms() {
        assert_eq!(parse_vector("0,0", 2).unwrap(), cvec(&[Complex64::new(0.0, 0.0); 2]));
        assert_eq!(parse_vector("0.3", 1).unwrap()[0], Complex64::new(0.3, 0.0));
        assert_eq!(parse_vector("0.3,-0.1", 1).unwrap()[0], Complex64::new(0.3, -0.1));
        let v = parse_vector("0.1,0.2;-0.3", 2).unwrap();
        assert_eq!(v[0], Complex64::new(0.1, 0.2));
        assert_eq!(v[1], Complex64::new(-0.3, 0.0));
        assert!(matches!(
            parse_vector("1;2;3", 2),
            Err(LabError::DimensionMismatch { .. })
        ));
        assert!(parse_vector("abc", 1).is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("0x5EED").unwrap(), 0x5EED);
        assert_eq!(parse_seed("42").unwrap(), 42);
        assert!(parse_seed("x").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-20..20").unwrap(), -20..=20);
        assert!(parse_range("3").is_err());
    }

    #[test]
    fn csv_splits_complex_columns() {
        let mut r = Report::new(&["a", "b"]);
        r.meta("seed", "0x5eed");
        r.row(vec![Cell::Real(1.5), Cell::Complex(Complex64::new(0.25, -1.0))]);
        assert_eq!(r.to_csv(), "# seed=0x5eed\na,b_re,b_im\n1.5,0.25,-1.0\n");
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["rows"][0]["b"]["im"], json!(-1.0));
    }
}
