//! Command-line front end: constant tables, verification suites and reports.

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::constants::{self, closed_form_bounds, Estimate, Witness};
use crate::cylindrical::{self, builtin_cylindrical_fields, cyl_integrals, section_4_reports, CylSplit};
use crate::error::Error;
use crate::fields::{self, builtin_fields, builtin_fields_on, Potential, ScalarField};
use crate::functionals::{self as fx, AnnulusSpec, CaseIntegrals, ChiSpec, VerificationReport};
use crate::kernel::{kernel_scale, kernel_value, k_p_via_abcd, sandwich_from_norms, cnorm, Params};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Header of the `verify` report, in column order.
pub const VERIFY_COLUMNS: [&str; 12] =
    ["suite", "p", "N", "field", "potential", "lhs", "rhs", "constant", "margin", "ratio", "level", "pass"];

/// Header of the `constants` table, in column order.
pub const CONSTANTS_COLUMNS: [&str; 13] = [
    "p", "c1", "c1_witness", "c2", "c3", "c1_upper", "c2_lower", "c3_upper", "c3_circle", "c2_witness",
    "c3_witness", "evals", "pass",
];

/// Header of the `table` output, in column order.
pub const TABLE_COLUMNS: [&str; 8] = ["p", "N", "c1_upper", "c2_lower", "c3_upper", "c3_circle", "hardy_constant", "c_tilde"];

#[derive(Parser, Debug)]
#[command(name = "hardylab", version, about = "Remainder terms of magnetic L^p-Hardy inequalities, 1 < p < 2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute c1, c2, c3 and check them against their closed-form brackets.
    Constants(CommonArgs),
    /// Run verification suites over a test matrix.
    Verify(VerifyArgs),
    /// Closed-form constants per (p, N); no optimization or quadrature.
    Table(TableArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Exponents: comma-separated values and/or `lo:hi:step` ranges.
    #[arg(long = "p", value_name = "LIST")]
    p: String,
    #[arg(long, default_value_t = constants::DEFAULT_TOL)]
    tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Multiply c1 and c3 by this factor before use. Only for exercising
    /// the failure path.
    #[arg(long, default_value_t = 1.0)]
    constant_scale: f64,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long = "p", value_name = "LIST")]
    p: String,
    #[arg(long, default_value = "2,3")]
    dim: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    /// Dimensions, comma-separated.
    #[arg(long, default_value = "2")]
    dim: String,
    /// Split dimensions for the cylindrical suite; default every valid k.
    #[arg(long)]
    k: Option<String>,
    #[arg(long, value_enum, default_value_t = PotentialChoice::All)]
    potential: PotentialChoice,
    /// Aharonov–Bohm fluxes, comma-separated.
    #[arg(long, default_value = "0.5,1")]
    alpha: String,
    /// Strength of the constant magnetic field.
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// A builtin field name or `all`.
    #[arg(long, default_value = "all")]
    field: String,
    /// Outer radius of the annulus used for the logarithmic remainder.
    #[arg(long = "R", default_value_t = 2.0)]
    r: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random draws per (p, N) in the kernel suite.
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum Suite {
    Kernel,
    Identity,
    Thm11,
    Thm12,
    Thm13,
    Lemma31,
    Cylindrical,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::Identity => "identity",
            Suite::Thm11 => "thm11",
            Suite::Thm12 => "thm12",
            Suite::Thm13 => "thm13",
            Suite::Lemma31 => "lemma31",
            Suite::Cylindrical => "cylindrical",
            Suite::All => "all",
        }
    }

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Kernel,
                Suite::Identity,
                Suite::Thm11,
                Suite::Thm12,
                Suite::Thm13,
                Suite::Lemma31,
                Suite::Cylindrical,
            ],
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PotentialChoice {
    Zero,
    Ab,
    Constant,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandKind {
    Constants,
    Verify { suite: Suite },
    Table,
}

/// Fully validated configuration of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub p_values: Vec<f64>,
    pub dims: Vec<usize>,
    pub k: Option<Vec<usize>>,
    pub potential: PotentialChoice,
    pub alphas: Vec<f64>,
    pub b: f64,
    pub field: Option<String>,
    pub r: f64,
    pub tol: f64,
    pub seed: u64,
    pub draws: usize,
    pub constant_scale: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Numerical(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Numerical(e)
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => EXIT_USAGE,
            RunError::Numerical(e) => match e {
                Error::InvalidParams(_) | Error::Domain(_) | Error::UnsupportedDimension(_) => EXIT_USAGE,
                Error::Inconsistency(_) => EXIT_ASSERTION,
                _ => EXIT_NUMERICAL,
            },
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "usage error: {m}"),
            RunError::Numerical(e) => write!(f, "{e}"),
        }
    }
}

/// Parses a list such as `1.2,1.5` or `1.1:1.9:0.1`. Range endpoints are
/// inclusive within 1e-12 and generated values are rounded to 12 decimals.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if token.contains(':') {
            let parts: Vec<&str> = token.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("range `{token}` must have the form lo:hi:step"));
            }
            let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
            let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0 && step.is_finite() && lo.is_finite() && hi.is_finite()) || hi < lo {
                return Err(format!("range `{token}` needs lo <= hi and a positive step"));
            }
            let count = ((hi - lo) / step + 1e-12 / step).floor() as usize;
            for i in 0..=count {
                let v = lo + i as f64 * step;
                let v = if (v - hi).abs() <= 1e-12 { hi } else { v };
                out.push(format!("{v:.12}").parse::<f64>().expect("formatted float parses"));
            }
        } else {
            out.push(token.parse::<f64>().map_err(|_| format!("`{token}` is not a number"))?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

fn parse_dims(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for t in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let n: usize = t.parse().map_err(|_| format!("`{t}` is not a dimension"))?;
        if !(2..=4).contains(&n) {
            return Err(format!("dimension {n} outside the supported range 2..=4"));
        }
        if !out.contains(&n) {
            out.push(n);
        }
    }
    if out.is_empty() {
        return Err("empty dimension list".into());
    }
    Ok(out)
}

fn check_p_values(ps: &[f64]) -> Result<(), String> {
    for &p in ps {
        Params::new(p, 2).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("--{name} must be positive and finite, got {v}"))
    }
}

/// Parses and validates command-line arguments. Help and version requests
/// come back as `Err(Ok(text))`.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, Result<String, String>>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Err(Ok(e.to_string())),
                _ => Err(Err(e.to_string())),
            };
        }
    };
    build_config(cli).map_err(Err)
}

fn build_config(cli: Cli) -> Result<RunConfig, String> {
    let base = |common: &CommonArgs, command: CommandKind| -> Result<RunConfig, String> {
        let p_values = parse_real_list(&common.p).map_err(|e| format!("--p: {e}"))?;
        check_p_values(&p_values)?;
        check_positive("tol", common.tol)?;
        check_positive("constant-scale", common.constant_scale)?;
        Ok(RunConfig {
            command,
            p_values,
            dims: vec![2],
            k: None,
            potential: PotentialChoice::All,
            alphas: vec![0.5, 1.0],
            b: 1.0,
            field: None,
            r: 2.0,
            tol: common.tol,
            seed: 0,
            draws: 100_000,
            constant_scale: common.constant_scale,
            out: common.out.clone(),
            format: common.format,
        })
    };
    match cli.command {
        Command::Constants(c) => base(&c, CommandKind::Constants),
        Command::Table(t) => {
            let p_values = parse_real_list(&t.p).map_err(|e| format!("--p: {e}"))?;
            check_p_values(&p_values)?;
            Ok(RunConfig {
                command: CommandKind::Table,
                p_values,
                dims: parse_dims(&t.dim).map_err(|e| format!("--dim: {e}"))?,
                k: None,
                potential: PotentialChoice::All,
                alphas: Vec::new(),
                b: 1.0,
                field: None,
                r: 2.0,
                tol: constants::DEFAULT_TOL,
                seed: 0,
                draws: 0,
                constant_scale: 1.0,
                out: t.out,
                format: t.format,
            })
        }
        Command::Verify(v) => {
            let mut cfg = base(&v.common, CommandKind::Verify { suite: v.suite })?;
            cfg.dims = parse_dims(&v.dim).map_err(|e| format!("--dim: {e}"))?;
            if let Some(k) = &v.k {
                let ks = parse_dims(k).map_err(|e| format!("--k: {e}"))?;
                cfg.k = Some(ks);
            }
            cfg.potential = v.potential;
            cfg.alphas = parse_real_list(&v.alpha).map_err(|e| format!("--alpha: {e}"))?;
            if cfg.alphas.iter().any(|a| !a.is_finite()) {
                return Err("--alpha values must be finite".into());
            }
            if !v.b.is_finite() {
                return Err("--b must be finite".into());
            }
            cfg.b = v.b;
            let names = ["bump", "phase1", "phase2", "wave", "modulated"];
            cfg.field = match v.field.as_str() {
                "all" => None,
                f if names.contains(&f) => Some(f.to_string()),
                f => return Err(format!("--field: unknown field `{f}` (expected one of {} or all)", names.join(", "))),
            };
            if !(v.r > 1.0 && v.r.is_finite()) {
                return Err(format!("--R must exceed 1, got {}", v.r));
            }
            cfg.r = v.r;
            cfg.seed = v.seed;
            if v.draws == 0 {
                return Err("--draws must be positive".into());
            }
            cfg.draws = v.draws;
            Ok(cfg)
        }
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_config(args) {
        Ok(c) => c,
        Err(Ok(text)) => {
            print!("{text}");
            return EXIT_OK;
        }
        Err(Err(text)) => {
            eprintln!("{}", text.trim_end());
            return EXIT_USAGE;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("{e}");
        return e.exit_code();
    }
    match execute(&cfg) {
        Ok(code) => code,
        Err(e @ RunError::Usage(_)) => {
            eprintln!("{e}");
            e.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), RunError> {
    let Ok(v) = std::env::var("HARDYLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| RunError::Usage(format!("HARDYLAB_THREADS must be a positive integer, got `{v}`")))?;
    // a pool that is already built (e.g. a second run in one process) is fine
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs a validated configuration, writes its output and returns the exit code.
pub fn execute(cfg: &RunConfig) -> Result<i32, RunError> {
    match cfg.command {
        CommandKind::Constants => {
            let rows = constants_rows(cfg)?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            emit(cfg, &CONSTANTS_COLUMNS, &rows, ConstantsRow::cells)?;
            report_summary(rows.len(), failed);
            Ok(if failed > 0 { EXIT_ASSERTION } else { EXIT_OK })
        }
        CommandKind::Table => {
            let rows = table_rows(cfg)?;
            emit(cfg, &TABLE_COLUMNS, &rows, TableRow::cells)?;
            Ok(EXIT_OK)
        }
        CommandKind::Verify { suite } => {
            let rows = verify_rows(cfg, suite)?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            emit(cfg, &VERIFY_COLUMNS, &rows, Row::cells)?;
            report_summary(rows.len(), failed);
            Ok(if failed > 0 { EXIT_ASSERTION } else { EXIT_OK })
        }
    }
}

fn report_summary(rows: usize, failed: usize) {
    if failed > 0 {
        eprintln!("{failed} of {rows} rows failed");
    } else {
        eprintln!("{rows} rows, all pass");
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit<R: Serialize>(
    cfg: &RunConfig,
    header: &[&str],
    rows: &[R],
    cells: impl Fn(&R) -> Vec<String>,
) -> Result<(), RunError> {
    let bytes = match cfg.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| RunError::Usage(format!("writing CSV: {e}"));
            w.write_record(header).map_err(io)?;
            for r in rows {
                w.write_record(cells(r)).map_err(io)?;
            }
            w.into_inner().map_err(|e| RunError::Usage(format!("writing CSV: {e}")))?
        }
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(rows).map_err(|e| RunError::Usage(format!("writing JSON: {e}")))?;
            s.push(b'\n');
            s
        }
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| RunError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| RunError::Usage(format!("cannot write stdout: {e}"))),
    }
}

/// One row of the `verify` report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub suite: String,
    pub p: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub field: String,
    pub potential: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub margin: f64,
    pub ratio: Option<f64>,
    pub level: u32,
    pub pass: bool,
}

impl Row {
    fn cells(&self) -> Vec<String> {
        vec![
            self.suite.clone(),
            float(self.p),
            self.n.to_string(),
            self.field.clone(),
            self.potential.clone(),
            float(self.lhs),
            float(self.rhs),
            float(self.constant),
            float(self.margin),
            self.ratio.map(float).unwrap_or_default(),
            self.level.to_string(),
            self.pass.to_string(),
        ]
    }

    fn from_report(suite: Suite, params: &Params, field: impl Into<String>, r: &VerificationReport) -> Self {
        Row {
            suite: suite.name().into(),
            p: params.p(),
            n: params.dim(),
            field: field.into(),
            potential: r.potential_name.clone(),
            lhs: r.lhs,
            rhs: r.rhs,
            constant: r.constant_used,
            margin: r.margin,
            ratio: r.ratio,
            level: r.quadrature_level,
            pass: r.pass,
        }
    }

    /// A thresholded measurement: `constant` is 1, `rhs` the threshold and
    /// `margin = lhs - rhs`.
    #[allow(clippy::too_many_arguments)]
    fn threshold(
        suite: Suite,
        params: &Params,
        field: impl Into<String>,
        potential: impl Into<String>,
        value: f64,
        threshold: f64,
        level: u32,
        pass: bool,
    ) -> Self {
        Row {
            suite: suite.name().into(),
            p: params.p(),
            n: params.dim(),
            field: field.into(),
            potential: potential.into(),
            lhs: value,
            rhs: threshold,
            constant: 1.0,
            margin: value - threshold,
            ratio: None,
            level,
            pass,
        }
    }
}

/// One row of the `constants` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsRow {
    pub p: f64,
    pub c1: f64,
    pub c1_witness: String,
    pub c2: f64,
    pub c3: f64,
    pub c1_upper: f64,
    pub c2_lower: f64,
    pub c3_upper: f64,
    pub c3_circle: f64,
    pub c2_witness: String,
    pub c3_witness: String,
    pub evals: usize,
    pub pass: bool,
}

impl ConstantsRow {
    fn cells(&self) -> Vec<String> {
        vec![
            float(self.p),
            float(self.c1),
            self.c1_witness.clone(),
            float(self.c2),
            float(self.c3),
            float(self.c1_upper),
            float(self.c2_lower),
            float(self.c3_upper),
            float(self.c3_circle),
            self.c2_witness.clone(),
            self.c3_witness.clone(),
            self.evals.to_string(),
            self.pass.to_string(),
        ]
    }
}

/// One row of the `table` output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub p: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub c1_upper: f64,
    pub c2_lower: f64,
    pub c3_upper: f64,
    pub c3_circle: f64,
    pub hardy_constant: f64,
    pub c_tilde: f64,
}

impl TableRow {
    fn cells(&self) -> Vec<String> {
        vec![
            float(self.p),
            self.n.to_string(),
            float(self.c1_upper),
            float(self.c2_lower),
            float(self.c3_upper),
            float(self.c3_circle),
            float(self.hardy_constant),
            float(self.c_tilde),
        ]
    }
}

pub fn witness_label(w: &Witness) -> String {
    match *w {
        Witness::Point { s, t } => format!("point(s={s:.12e},t={t:.12e})"),
        Witness::OriginDirectional { theta } => format!("origin(theta={theta:.12e})"),
        Witness::Infinity => "infinity".into(),
        Witness::UnitCircle { s } => format!("unit-circle(s={s:.12e})"),
    }
}

/// `c1`, `c2`, `c3` of one exponent, after the tamper factor.
#[derive(Debug, Clone, Copy)]
struct Triple {
    c1: Estimate,
    c2: Estimate,
    c3: Estimate,
}

fn compute_triple(p: f64, tol: f64, scale: f64) -> Result<Triple, RunError> {
    let params = Params::new(p, 2)?;
    let mut c1 = constants::c1(&params, tol)?;
    let c2 = constants::c2(&params, tol)?;
    let mut c3 = constants::c3(&params, tol)?;
    c1.value *= scale;
    c3.value *= scale;
    Ok(Triple { c1, c2, c3 })
}

/// Bracket inequalities: `0 < c1 <= p(p-1)/2^{p-1}`, `c2 >= p/2^{p-1}`,
/// `0 < c3 <= min{p(p-1)/2, p-1, 2^p-p-1}`, each within `tol`.
pub fn constants_rows(cfg: &RunConfig) -> Result<Vec<ConstantsRow>, RunError> {
    let mut rows = Vec::with_capacity(cfg.p_values.len());
    for &p in &cfg.p_values {
        let params = Params::new(p, 2)?;
        let t = compute_triple(p, cfg.tol, cfg.constant_scale)?;
        let b = closed_form_bounds(&params);
        let tol = cfg.tol;
        let pass = t.c1.value > 0.0
            && t.c1.value <= b.c1_upper + tol
            && t.c2.value >= b.c2_lower - tol
            && t.c3.value > 0.0
            && t.c3.value <= b.c3_upper.min(b.c3_circle) + tol;
        rows.push(ConstantsRow {
            p,
            c1: t.c1.value,
            c1_witness: witness_label(&t.c1.witness),
            c2: t.c2.value,
            c3: t.c3.value,
            c1_upper: b.c1_upper,
            c2_lower: b.c2_lower,
            c3_upper: b.c3_upper,
            c3_circle: b.c3_circle,
            c2_witness: witness_label(&t.c2.witness),
            c3_witness: witness_label(&t.c3.witness),
            evals: t.c1.evals + t.c2.evals + t.c3.evals,
            pass,
        });
    }
    rows.sort_by(|a, b| a.p.total_cmp(&b.p));
    Ok(rows)
}

pub fn table_rows(cfg: &RunConfig) -> Result<Vec<TableRow>, RunError> {
    let mut rows = Vec::new();
    for &p in &cfg.p_values {
        for &n in &cfg.dims {
            let params = Params::new(p, n)?;
            let b = closed_form_bounds(&params);
            rows.push(TableRow {
                p,
                n,
                c1_upper: b.c1_upper,
                c2_lower: b.c2_lower,
                c3_upper: b.c3_upper,
                c3_circle: b.c3_circle,
                hardy_constant: params.hardy_constant(),
                c_tilde: fx::c_tilde(&params),
            });
        }
    }
    rows.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.n.cmp(&b.n)));
    Ok(rows)
}

/// Shared state of a `verify` run: constants per exponent and case
/// integrals per (p, N, field, potential), each computed once.
struct Session<'a> {
    cfg: &'a RunConfig,
    triples: HashMap<u64, Triple>,
    cases: HashMap<(u64, usize, String, String), CaseIntegrals>,
}

impl<'a> Session<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Self { cfg, triples: HashMap::new(), cases: HashMap::new() }
    }

    fn triple(&mut self, p: f64) -> Result<Triple, RunError> {
        if let Some(t) = self.triples.get(&p.to_bits()) {
            return Ok(*t);
        }
        let t = compute_triple(p, self.cfg.tol, self.cfg.constant_scale)?;
        self.triples.insert(p.to_bits(), t);
        Ok(t)
    }

    fn case(&mut self, params: &Params, u: &ScalarField, a: &Potential) -> Result<CaseIntegrals, RunError> {
        let key = (params.p().to_bits(), params.dim(), u.name().to_string(), a.name());
        if let Some(c) = self.cases.get(&key) {
            return Ok(*c);
        }
        let c = fx::case_integrals(params, u, a, self.cfg.tol)?;
        self.cases.insert(key, c);
        Ok(c)
    }

    fn fields(&self, params: &Params) -> Vec<ScalarField> {
        self.select(builtin_fields(params))
    }

    fn select(&self, fields: Vec<ScalarField>) -> Vec<ScalarField> {
        fields.into_iter().filter(|f| self.cfg.field.as_deref().map_or(true, |name| f.name() == name)).collect()
    }

    /// Potentials of the matrix in dimension `n`; Aharonov–Bohm only for `N = 2`.
    fn potentials(&self, n: usize) -> Vec<Potential> {
        let cfg = self.cfg;
        let mut out = Vec::new();
        let want = |c: PotentialChoice| cfg.potential == c || cfg.potential == PotentialChoice::All;
        if want(PotentialChoice::Zero) {
            out.push(Potential::zero());
        }
        if want(PotentialChoice::Ab) && n == 2 {
            out.extend(cfg.alphas.iter().map(|&a| Potential::aharonov_bohm(a)));
        }
        if want(PotentialChoice::Constant) {
            out.push(Potential::constant_field(cfg.b));
        }
        out
    }

    fn seed_for(&self, tag: u64, params: &Params) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(tag);
        rng.gen::<u64>() ^ params.p().to_bits().rotate_left(17) ^ (params.dim() as u64).rotate_left(41)
    }
}

pub fn verify_rows(cfg: &RunConfig, suite: Suite) -> Result<Vec<Row>, RunError> {
    let mut session = Session::new(cfg);
    let mut rows = Vec::new();
    let mut matched_case = false;
    for s in suite.expand() {
        for &p in &cfg.p_values {
            for &n in &cfg.dims {
                let params = Params::new(p, n)?;
                let before = rows.len();
                match s {
                    Suite::Kernel => kernel_suite(&mut session, &params, &mut rows)?,
                    Suite::Identity => identity_suite(&mut session, &params, &mut rows)?,
                    Suite::Thm11 => thm11_suite(&mut session, &params, &mut rows)?,
                    Suite::Thm12 => thm12_suite(&mut session, &params, &mut rows)?,
                    Suite::Thm13 => thm13_suite(&mut session, &params, &mut rows)?,
                    Suite::Lemma31 => lemma31_suite(&mut session, &params, &mut rows)?,
                    Suite::Cylindrical => cylindrical_suite(&mut session, &params, &mut rows)?,
                    Suite::All => unreachable!("expanded above"),
                }
                matched_case |= rows.len() > before;
            }
        }
    }
    if !matched_case {
        return Err(RunError::Usage(
            "the selection matches no case (Aharonov-Bohm potentials need --dim 2)".into(),
        ));
    }
    rows.sort_by(|a, b| {
        a.suite
            .cmp(&b.suite)
            .then(a.p.total_cmp(&b.p))
            .then(a.n.cmp(&b.n))
            .then(a.field.cmp(&b.field))
            .then(a.potential.cmp(&b.potential))
    });
    Ok(rows)
}

/// One component: a unit normal, or a log-uniform magnitude in `[1e-6, 1e6]`
/// with a random sign.
fn random_component(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        rng.sample(StandardNormal)
    } else {
        let m = 10f64.powf(rng.gen_range(-6.0..=6.0));
        if rng.gen_bool(0.5) {
            m
        } else {
            -m
        }
    }
}

fn random_cvec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(random_component(rng), random_component(rng))).collect()
}

/// A random pair `(η, ζ)`. Besides independent draws, the diagonal `ζ = η`,
/// `ζ = 0`, small perturbations of `η` and real multiples of `η` are drawn on
/// purpose, since the kernel is singular or degenerate there.
pub fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let eta = random_cvec(rng, n);
    let zeta = match rng.gen_range(0..8) {
        0 => eta.clone(),
        1 => vec![Complex64::new(0.0, 0.0); n],
        2 => {
            let eps = 10f64.powf(rng.gen_range(-9.0..-1.0));
            let d = random_cvec(rng, n);
            let (en, dn) = (cnorm(&eta), cnorm(&d));
            eta.iter().zip(&d).map(|(a, b)| a + b * (eps * en / dn)).collect()
        }
        3 => {
            let t = rng.gen_range(-3.0..3.0);
            eta.iter().map(|a| a * t).collect()
        }
        _ => random_cvec(rng, n),
    };
    (eta, zeta)
}

fn kernel_suite(session: &mut Session, params: &Params, rows: &mut Vec<Row>) -> Result<(), RunError> {
    let cfg = session.cfg;
    let t = session.triple(params.p())?;
    let (c1, c2, c3) = (t.c1.value, t.c2.value, t.c3.value);
    let p = params.p();
    let n = params.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(session.seed_for(1, params));
    let mut abcd = 0f64;
    let mut diagonal = 0f64;
    let mut sandwich = f64::INFINITY;
    let mut two_sided = f64::INFINITY;
    let mut min_form = f64::INFINITY;
    let mut nonneg = f64::INFINITY;
    for _ in 0..cfg.draws {
        let (eta, zeta) = random_pair(&mut rng, n);
        let k = kernel_value(p, &eta, &zeta);
        let scale = kernel_scale(p, &eta, &zeta);

        let diff: Vec<Complex64> = eta.iter().zip(&zeta).map(|(a, b)| a - b).collect();
        let (a, b): (Vec<f64>, Vec<f64>) = diff.iter().map(|z| (z.re, z.im)).unzip();
        let (c, d): (Vec<f64>, Vec<f64>) = zeta.iter().map(|z| (z.re, z.im)).unzip();
        let alt = k_p_via_abcd(params, &a, &b, &c, &d)?;
        if scale > 0.0 {
            abcd = abcd.max((k - alt).abs() / scale);
            nonneg = nonneg.min(k / scale);
        }

        let diag = kernel_value(p, &eta, &eta);
        let en = cnorm(&eta).powf(p);
        let zero = kernel_value(p, &eta, &vec![Complex64::new(0.0, 0.0); n]);
        if en > 0.0 {
            diagonal = diagonal.max((diag - en).abs() / en).max(zero.abs() / en);
        }

        let s = sandwich_from_norms(p, cnorm(&eta), cnorm(&diff), cnorm(&zeta));
        if s.upper > 0.0 {
            sandwich = sandwich.min((s.mid - s.lower).min(s.upper - s.mid) / s.upper);
        }
        let sc = scale + c2 * s.lower;
        if sc > 0.0 {
            two_sided = two_sided.min((k - c1 * s.lower).min(c2 * s.lower - k) / sc);
        }
        let sc = scale + c3 * s.mid;
        if sc > 0.0 {
            min_form = min_form.min((k - c3 * s.mid) / sc);
        }
    }
    let label = format!("random({})", cfg.draws);
    let suite = Suite::Kernel;
    rows.push(Row::threshold(suite, params, "abcd", &label, abcd, 1e-12, 0, abcd <= 1e-12));
    rows.push(Row::threshold(suite, params, "diagonal", &label, diagonal, 1e-12, 0, diagonal <= 1e-12));
    rows.push(Row::threshold(suite, params, "nonnegative", &label, nonneg, -1e-12, 0, nonneg >= -1e-12));
    rows.push(Row::threshold(suite, params, "sandwich", &label, sandwich, -1e-12, 0, sandwich >= -1e-12));
    let mut r = Row::threshold(suite, params, "bounds-c1-c2", &label, two_sided, -1e-10, 0, two_sided >= -1e-10);
    r.constant = c1;
    rows.push(r);
    let mut r = Row::threshold(suite, params, "bound-c3", &label, min_form, -1e-10, 0, min_form >= -1e-10);
    r.constant = c3;
    rows.push(r);
    Ok(())
}

const POINTWISE_POINTS: usize = 1000;

fn identity_suite(session: &mut Session, params: &Params, rows: &mut Vec<Row>) -> Result<(), RunError> {
    let tol = session.cfg.tol;
    for a in session.potentials(params.dim()) {
        for u in session.fields(params) {
            let c = session.case(params, &u, &a)?;
            let r = fx::identity_report(&c, &u, &a, tol);
            rows.push(Row::from_report(Suite::Identity, params, u.name(), &r));

            let seed = session.seed_for(2, params);
            let points = fields::sample_points(&u, params.dim(), POINTWISE_POINTS, seed);
            let dia = fields::diamagnetic_check(&u, &a, &points, f64::INFINITY)?;
            let m = dia.worst_margin;
            rows.push(Row::threshold(
                Suite::Identity,
                params,
                format!("{}/diamagnetic", u.name()),
                a.name(),
                m,
                -1e-8,
                0,
                m >= -1e-8,
            ));
            let mut worst = 0f64;
            for x in &points {
                worst = worst.max(fields::identity_2_6_residual(params, &u, &a, x)?);
            }
            rows.push(Row::threshold(
                Suite::Identity,
                params,
                format!("{}/pointwise", u.name()),
                a.name(),
                worst,
                1e-9,
                0,
                worst <= 1e-9,
            ));
        }
    }
    Ok(())
}

fn thm11_suite(session: &mut Session, params: &Params, rows: &mut Vec<Row>) -> Result<(), RunError> {
    let tol = session.cfg.tol;
    let t = session.triple(params.p())?;
    for a in session.potentials(params.dim()) {
        for u in session.fields(params) {
            let c = session.case(params, &u, &a)?;
            let r = fx::theorem_1_1_report(&c, &u, &a, t.c1.value, t.c2.value, tol)?;
            rows.push(Row::from_report(Suite::Thm11, params, u.name(), &r));
        }
    }
    Ok(())
}

fn thm12_suite(session: &mut Session, params: &Params, rows: &mut Vec<Row>) -> Result<(), RunError> {
    let tol = session.cfg.tol;
    let t = session.triple(params.p())?;
    let upper = 3f64.powf(2.0 - params.p());
    for a in session.potentials(params.dim()) {
        for u in session.fields(params) {
            let c = session.case(params, &u, &a)?;
            let r = fx::theorem_1_2_report(params, &c, &u, &a, t.c3.value, tol)?;
            rows.push(Row::from_report(Suite::Thm12, params, u.name(), &r));
            // Rem <= min-form <= 3^{2-p} Rem
            let mut s = Row::from_report(Suite::Thm12, params, format!("{}/sandwich", u.name()), &r);
            s.lhs = c.min_form;
            s.rhs = c.rem;
            s.constant = upper;
            s.margin = c.min_form - upper * c.rem;
            s.ratio = (c.rem > 0.0).then(|| c.min_form / c.rem);
            s.pass = fx::sandwich_holds(params, &c);
            rows.push(s);
        }
    }
    Ok(())
}

fn thm13_suite(session: &mut Session, params: &Params, rows: &mut Vec<Row>) -> Result<(), RunError> {
    let cfg = session.cfg;
    let t = session.triple(params.p())?;
    let spec = AnnulusSpec::new(cfg.r)?;
    let chi = ChiSpec::default_for(&spec);
    for a in session.potentials(params.dim()).into_iter().filter(|a| !a.is_zero()) {
        let (mu, nu) = fx::mu_nu_estimates(params, &a, &spec, cfg.tol)?;
        let lb = fx::lemma_3_3_lower_bound(params, &spec, mu.value)?;
        let c_bpn = fx::c_bpn(params, &spec, &chi, nu.value)?;
        let field = format!("annulus(R={})/mu-nu", cfg.r);
        let mut r = Row::threshold(Suite::Thm13, params, field, a.name(), nu.value, mu.value, mu.level, false);
        r.ratio = Some(nu.value / mu.value);
        r.pass = nu.value > 0.0 && nu.value.is_finite() && mu.value.is_finite() && nu.value <= mu.value;
        rows.push(r);
        let field = format!("annulus(R={})/nu-lower-bound", cfg.r);
        rows.push(Row::threshold(Suite::Thm13, params, field, a.name(), lb, 0.0, mu.level, lb > 0.0 && lb.is_finite()));

        let mut cases = Vec::new();
        for u in session.fields(params) {
            let c = session.case(params, &u, &a)?;
            let r = fx::theorem_1_3_report(&c, &u, &a, t.c3.value, c_bpn)?;
            rows.push(Row::from_report(Suite::Thm13, params, u.name(), &r));
            cases.push(c);
        }
        if !cases.is_empty() {
            let st = fx::theorem_1_3_stability(&cases)?;
            let pass = st.inf_ratio > 0.0 && st.inf_ratio_coarse > 0.0 && st.relative_change <= 0.05;
            let level = cases.iter().map(|c| c.level).max().unwrap_or(0);
            let mut r = Row::threshold(Suite::Thm13, params, "inf-ratio/stability", a.name(), st.relative_change, 0.05, level, pass);
            r.ratio = Some(st.inf_ratio);
            rows.push(r);
        }
    }
    Ok(())
}

/// Supports on each side of the unit sphere.
pub const LEMMA_3_1_SUPPORTS: [(&str, f64, f64); 2] = [("ball", 0.3, 0.9), ("complement", 1.5, 3.0)];

fn lemma31_suite(session: &mut Session, params: &Params, rows: &mut Vec<Row>) -> Result<(), RunError> {
    let tol = session.cfg.tol;
    for (side, lo, hi) in LEMMA_3_1_SUPPORTS {
        for u in session.select(builtin_fields_on(params, lo, hi)?) {
            let (mut r, _) = fx::verify_lemma_3_1(params, &u, 1.0, tol)?;
            // the constant is an upper bound here: pass iff lhs <= C̃·rhs
            r.margin = r.constant_used * r.rhs - r.lhs;
            rows.push(Row::from_report(Suite::Lemma31, params, format!("{side}:{}", u.name()), &r));
        }
    }
    Ok(())
}

fn cylindrical_suite(session: &mut Session, params: &Params, rows: &mut Vec<Row>) -> Result<(), RunError> {
    let cfg = session.cfg;
    let n = params.dim();
    let t = session.triple(params.p())?;
    let ks: Vec<usize> = match &cfg.k {
        Some(ks) => ks.iter().copied().filter(|&k| k <= n).collect(),
        None => (2..=n).collect(),
    };
    let suite = Suite::Cylindrical;
    for k in ks {
        let split = CylSplit::from_parts(params.p(), n, k)?;
        let sp = *split.params();
        // at k = N the cylinder is the annulus, and the same fields serve both modules
        let family = if k == n { builtin_fields(params) } else { builtin_cylindrical_fields(&split) };
        for u in session.select(family) {
            let c = cyl_integrals(&split, &u, cfg.tol)?;
            let tag = |what: &str| format!("k{k}:{}/{what}", u.name());
            let r = cylindrical::cylindrical_identity_report(&c, &u, cfg.tol);
            rows.push(Row::from_report(suite, &sp, tag("identity"), &r));
            let s4 = section_4_reports(&c, &u, t.c1.value, t.c2.value, t.c3.value, cfg.tol);
            rows.push(Row::from_report(suite, &sp, tag("two-sided"), &s4.two_sided));
            rows.push(Row::from_report(suite, &sp, tag("min-form"), &s4.min_form));
            rows.push(Row::from_report(suite, &sp, tag("corollary"), &s4.corollary));
            let chain = cylindrical::truncation_chain_holds(&c);
            let mut r = Row::threshold(suite, &sp, tag("truncation"), "zero", c.radial_gradient, c.full_gradient, c.level, chain);
            r.ratio = (c.full_gradient > 0.0).then(|| c.radial_gradient / c.full_gradient);
            rows.push(r);
            if k == n {
                let full = fx::case_integrals_at(params, &u, &Potential::zero(), c.level)?;
                let rel = (c.hardy_full - full.hardy).abs() / full.hardy.abs().max(f64::MIN_POSITIVE);
                rows.push(Row::threshold(suite, &sp, tag("full-space"), "zero", rel, 1e-8, c.level, rel <= 1e-8));
            }
        }
    }
    Ok(())
}
