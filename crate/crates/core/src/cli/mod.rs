//! Command-line front end: argument types, CSV output and the four commands.
//!
//! The binary in `src/bin/prabhakar.rs` only parses arguments and maps
//! [`CliError`] to a process exit code; everything else lives here so the
//! commands can be driven from tests without spawning a process.

mod verify;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::cauchy::{volterra_solve, CauchyProblem, SeriesOptions, SeriesSolution};
use crate::error::Error;
use crate::operators::{
    caputo_apply, caputo_apply_sampled, prabhakar_apply_detailed, prabhakar_power, prabhakar_power_right,
    rl_apply, rl_power, CaputoInput, CaputoOptions, Grid, OperatorSpec, SampledFunction,
};
use crate::psi::{PsiDescriptor, PsiMap};
use crate::special_fn::{ml3, MlParams, SeriesControl};

pub use verify::{run_suites, Suite, SuiteReport};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const CONVERGENCE: u8 = 3;
    pub const CROSS_CHECK: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Convergence(String),
    #[error("series and Volterra columns differ by {diff:.3e} (relative), above --cross-tol {tol:e}")]
    CrossCheck { diff: f64, tol: f64 },
    #[error("{failed} of {total} verification suites failed")]
    VerifyFailed { failed: usize, total: usize },
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed { .. } => exit::VERIFY_FAILED,
            CliError::Input(_) | CliError::Io(_) => exit::INPUT,
            CliError::Convergence(_) => exit::CONVERGENCE,
            CliError::CrossCheck { .. } => exit::CROSS_CHECK,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } | Error::SingularStep { .. } => CliError::Convergence(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "prabhakar",
    version,
    about = "Prabhakar-type fractional operators and Cauchy problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write CSV here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    /// Write a JSON diagnostics report to this path.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    /// Relative stopping tolerance of every series.
    #[arg(long, global = true, default_value_t = 1e-14)]
    pub rel_tol: f64,

    /// Term cap of every series.
    #[arg(long, global = true, default_value_t = 1000)]
    pub max_terms: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate E^γ_{ρ,α}(z) on a grid of z.
    Ml(MlArgs),
    /// Apply an operator to a function and sample the result.
    Op(OpArgs),
    /// Solve a Cauchy problem given as JSON.
    Solve(SolveArgs),
    /// Run the built-in property checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct MlArgs {
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub gamma: f64,
    /// `start:stop:step` or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub z: GridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpKind {
    Prabhakar,
    Rl,
    Caputo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Args)]
pub struct OpArgs {
    /// Operator JSON (inline or a path): rho, alpha, gamma, omega, psi, interval.
    #[arg(long)]
    pub spec: String,
    /// `power:<delta>`, `csv:<path>` or one of one, x, exp, sin, cos.
    #[arg(long = "f")]
    pub function: FunctionSel,
    /// Evaluation points, `start:stop:step`; defaults to 11 points over the interval.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<GridSpec>,
    #[arg(long, value_enum, default_value_t = OpKind::Prabhakar)]
    pub kind: OpKind,
    /// Order for `--kind rl` and `--kind caputo`.
    #[arg(long)]
    pub order: Option<f64>,
    /// Right-sided operator (closed form on power functions only).
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    pub side: SideArg,
    /// Quadrature nodes when the function is a built-in expression.
    #[arg(long, default_value_t = 400)]
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Series,
    Volterra,
    Both,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem JSON (inline or a path).
    #[arg(long)]
    pub problem: String,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    /// Output grid size, uniform in ψ; also the Volterra grid.
    #[arg(long, default_value_t = 201)]
    pub nodes: usize,
    /// Largest allowed relative difference between the two columns.
    #[arg(long, default_value_t = 1e-3)]
    pub cross_tol: f64,
    /// Cap on the outer series index.
    #[arg(long, default_value_t = 60)]
    pub j_max: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random cases per suite.
    #[arg(long, default_value_t = 4)]
    pub cases: usize,
}

/// `start:stop:step` (inclusive of `stop` within half a step) or one value.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec(pub Vec<f64>);

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        if parts.iter().any(|v| !v.is_finite()) {
            return Err(format!("non-finite value in {text:?}"));
        }
        match parts[..] {
            [v] => Ok(GridSpec(vec![v])),
            [start, stop, step] => {
                if !(step > 0.0) || stop < start {
                    return Err(format!("need step > 0 and stop >= start in {text:?}"));
                }
                let n = ((stop - start) / step + 0.5).floor() as usize;
                if n >= 10_000_000 {
                    return Err(format!("{text:?} has too many points"));
                }
                let snap = |v: f64| if (v - stop).abs() <= 1e-9 * step { stop } else { v };
                Ok(GridSpec((0..=n).map(|k| snap(start + k as f64 * step)).collect()))
            }
            _ => Err(format!("expected start:stop:step or a number, got {text:?}")),
        }
    }
}

/// Function selector of the `op` command.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSel {
    /// (ψ(t) − ψ(a))^{δ−1}
    Power(f64),
    /// Two columns `x,value`, with a header row.
    Csv(PathBuf),
    Builtin(Builtin),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    One,
    X,
    Exp,
    Sin,
    Cos,
}

impl Builtin {
    fn eval(self, x: f64) -> f64 {
        match self {
            Builtin::One => 1.0,
            Builtin::X => x,
            Builtin::Exp => x.exp(),
            Builtin::Sin => x.sin(),
            Builtin::Cos => x.cos(),
        }
    }
}

impl FromStr for FunctionSel {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        if let Some(d) = text.strip_prefix("power:") {
            let delta: f64 = d.parse().map_err(|e| format!("power exponent {d:?}: {e}"))?;
            return Ok(FunctionSel::Power(delta));
        }
        if let Some(path) = text.strip_prefix("csv:") {
            return Ok(FunctionSel::Csv(PathBuf::from(path)));
        }
        let b = match text {
            "one" => Builtin::One,
            "x" => Builtin::X,
            "exp" => Builtin::Exp,
            "sin" => Builtin::Sin,
            "cos" => Builtin::Cos,
            _ => return Err(format!("unknown function {text:?}")),
        };
        Ok(FunctionSel::Builtin(b))
    }
}

/// Operator description read by `op`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpSpecJson {
    pub rho: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub omega: f64,
    pub psi: PsiDescriptor,
    pub interval: [f64; 2],
}

impl OpSpecJson {
    pub fn into_spec(self) -> crate::Result<OperatorSpec> {
        let [a, b] = self.interval;
        let psi = PsiMap::builtin(self.psi, a, b)?;
        OperatorSpec::new(MlParams::new(self.rho, self.alpha, self.gamma, self.omega)?, psi)
    }
}

/// CSV number format: 17 significant digits, so values read back exactly.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
fn read_json_arg(arg: &str) -> CliResult<String> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_owned());
    }
    fs::read_to_string(arg).map_err(|e| CliError::Input(format!("{arg}: {e}")))
}

/// Reads `x,value` rows (header required).
pub fn read_samples(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let mut rdr =
        csv::Reader::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let field = |i: usize| -> CliResult<f64> {
            rec.get(i)
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| CliError::Input(format!("{}: bad row {}", path.display(), line + 2)))
        };
        xs.push(field(0)?);
        vs.push(field(1)?);
    }
    Ok((xs, vs))
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    fn write(&self, out: &mut dyn Write) -> CliResult<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io_err = |e: csv::Error| CliError::Io(io::Error::other(e));
        w.write_record(&self.header).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(io_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs one parsed command line, writing CSV or the verify summary to
/// `out` unless `--output` redirects it.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let ctl = SeriesControl::new(cli.rel_tol, cli.max_terms)?;
    let mut report = json!({});
    let outcome = match &cli.command {
        Command::Ml(a) => cmd_ml(a, &ctl, &mut report),
        Command::Op(a) => cmd_op(a, &ctl, &mut report),
        Command::Solve(a) => cmd_solve(a, &ctl, &mut report),
        Command::Verify(a) => {
            let reports = run_suites(a.suite, a.seed, a.cases);
            for r in &reports {
                writeln!(out, "{r}")?;
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            report = json!({
                "seed": a.seed,
                "passed": failed == 0,
                "suites": reports,
            });
            write_report(cli, &report)?;
            return if failed == 0 {
                Ok(())
            } else {
                Err(CliError::VerifyFailed {
                    failed,
                    total: reports.len(),
                })
            };
        }
    };
    // tables are written even when the run ends in a convergence or
    // cross-check error, so the offending rows can be inspected
    let (table, status) = match outcome {
        Ok((t, status)) => (t, status),
        Err(e) => {
            report["error"] = json!(e.to_string());
            write_report(cli, &report)?;
            return Err(e);
        }
    };
    match &cli.output {
        Some(path) => table.write(&mut fs::File::create(path)?)?,
        None => table.write(out)?,
    }
    if let Err(e) = &status {
        report["error"] = json!(e.to_string());
    }
    write_report(cli, &report)?;
    status
}

fn write_report(cli: &Cli, report: &serde_json::Value) -> CliResult<()> {
    if let Some(path) = &cli.report {
        let text = serde_json::to_string_pretty(report).expect("report is plain JSON");
        fs::write(path, text + "\n")?;
    }
    Ok(())
}

type CmdOutput = (Table, CliResult<()>);

fn cmd_ml(a: &MlArgs, ctl: &SeriesControl, report: &mut serde_json::Value) -> CliResult<CmdOutput> {
    let p = MlParams::new(a.rho, a.alpha, a.gamma, 0.0)?;
    let mut t = Table::new(vec!["z", "value", "terms", "converged"]);
    let mut failed = Vec::new();
    for &z in &a.z.0 {
        let s = ml3(&p, z, ctl)?;
        if !s.converged {
            failed.push(z);
        }
        t.rows.push(vec![
            fmt_num(z),
            fmt_num(s.value),
            s.terms.to_string(),
            s.converged.to_string(),
        ]);
    }
    *report = json!({ "command": "ml", "points": a.z.0.len(), "not_converged": failed });
    let status = if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Convergence(format!(
            "series did not converge at z = {failed:?}"
        )))
    };
    Ok((t, status))
}

fn cmd_op(a: &OpArgs, ctl: &SeriesControl, report: &mut serde_json::Value) -> CliResult<CmdOutput> {
    let raw: OpSpecJson = serde_json::from_str(&read_json_arg(&a.spec)?)
        .map_err(|e| CliError::Input(format!("operator JSON: {e}")))?;
    let spec = raw.into_spec()?;
    let (lo, hi) = spec.psi.domain();
    let xs = match &a.x {
        Some(g) => g.0.clone(),
        None => (0..=10).map(|k| lo + (hi - lo) * f64::from(k) / 10.0).collect(),
    };
    let order = || {
        a.order
            .ok_or_else(|| CliError::Input("--order is required for --kind rl and caputo".into()))
    };
    if a.side == SideArg::Right && !matches!(a.function, FunctionSel::Power(_)) {
        return Err(CliError::Input(
            "right-sided operators take power functions only".into(),
        ));
    }
    if a.side == SideArg::Right && a.kind != OpKind::Prabhakar {
        return Err(CliError::Input(
            "right-sided evaluation is available for --kind prabhakar".into(),
        ));
    }

    let sampled = match &a.function {
        FunctionSel::Power(_) => None,
        FunctionSel::Csv(path) => {
            let (nodes, values) = read_samples(path)?;
            let grid = Arc::new(Grid::new(spec.psi.clone(), nodes)?);
            Some(SampledFunction::new(grid, values)?)
        }
        FunctionSel::Builtin(b) => {
            let grid = Arc::new(Grid::over_domain(spec.psi.clone(), a.nodes)?);
            Some(SampledFunction::from_fn(grid, |x| b.eval(x))?)
        }
    };

    let mut t = Table::new(vec!["x", "value"]);
    let mut not_converged = Vec::new();
    for &x in &xs {
        let v = match (&a.function, a.kind, a.side) {
            (FunctionSel::Power(d), OpKind::Prabhakar, SideArg::Left) => prabhakar_power(&spec, *d, x, ctl)?,
            (FunctionSel::Power(d), OpKind::Prabhakar, SideArg::Right) => {
                prabhakar_power_right(&spec, *d, x, ctl)?
            }
            (FunctionSel::Power(d), OpKind::Rl, _) => rl_power(order()?, *d, &spec.psi, spec.a, x)?,
            (FunctionSel::Power(d), OpKind::Caputo, _) => {
                let s0 = spec.psi.value(spec.a);
                let psi = spec.psi.clone();
                let f = move |t: f64| (psi.value(t) - s0).powf(d - 1.0);
                let opts = CaputoOptions {
                    nodes: a.nodes,
                    ..CaputoOptions::default()
                };
                caputo_apply(order()?, &spec.psi, CaputoInput::Function(&f), x, &opts)?
            }
            (FunctionSel::Builtin(b), OpKind::Caputo, _) => {
                let f = |t: f64| b.eval(t);
                let opts = CaputoOptions {
                    nodes: a.nodes,
                    ..CaputoOptions::default()
                };
                caputo_apply(order()?, &spec.psi, CaputoInput::Function(&f), x, &opts)?
            }
            (_, kind, _) => {
                let f = sampled.as_ref().expect("non-power selectors are sampled");
                match kind {
                    OpKind::Prabhakar => {
                        let s = prabhakar_apply_detailed(&spec, f, x, ctl)?;
                        if !s.converged {
                            not_converged.push(x);
                        }
                        s.value
                    }
                    OpKind::Rl => rl_apply(order()?, f, x)?,
                    OpKind::Caputo => caputo_apply_sampled(order()?, f, x)?,
                }
            }
        };
        t.rows.push(vec![fmt_num(x), fmt_num(v)]);
    }
    *report = json!({
        "command": "op",
        "psi": spec.psi.name(),
        "points": xs.len(),
        "not_converged": not_converged,
    });
    let status = if not_converged.is_empty() {
        Ok(())
    } else {
        Err(CliError::Convergence(format!(
            "term series did not converge at x = {not_converged:?}"
        )))
    };
    Ok((t, status))
}

fn cmd_solve(a: &SolveArgs, ctl: &SeriesControl, report: &mut serde_json::Value) -> CliResult<CmdOutput> {
    let problem = CauchyProblem::from_json(&read_json_arg(&a.problem)?)?;
    let grid = Arc::new(Grid::over_domain(problem.op.psi.clone(), a.nodes)?);
    let xs = grid.x().to_vec();

    let series = match a.method {
        Method::Volterra => None,
        _ => {
            let opts = SeriesOptions {
                j_max: a.j_max,
                ctl: *ctl,
                ..SeriesOptions::default()
            };
            Some(SeriesSolution::new(&problem, opts).evaluate_many(&xs)?)
        }
    };
    let volterra = match a.method {
        Method::Series => None,
        _ => Some(volterra_solve(&problem, grid.clone(), ctl)?.into_values()),
    };

    let header = match a.method {
        Method::Series => vec!["x", "u_series"],
        Method::Volterra => vec!["x", "u_volterra"],
        Method::Both => vec!["x", "u_series", "u_volterra", "abs_diff"],
    };
    let mut t = Table::new(header);
    let mut not_converged = Vec::new();
    let mut max_diff = 0.0_f64;
    let mut scale = 0.0_f64;
    for (i, &x) in xs.iter().enumerate() {
        let mut row = vec![fmt_num(x)];
        if let Some(s) = &series {
            if !s[i].converged {
                not_converged.push(x);
            }
            row.push(fmt_num(s[i].value));
            scale = scale.max(s[i].value.abs());
        }
        if let Some(v) = &volterra {
            row.push(fmt_num(v[i]));
        }
        if let (Some(s), Some(v)) = (&series, &volterra) {
            let d = (s[i].value - v[i]).abs();
            max_diff = max_diff.max(d);
            row.push(fmt_num(d));
        }
        t.rows.push(row);
    }
    let rel_diff = if max_diff == 0.0 { 0.0 } else { max_diff / scale };
    *report = json!({
        "command": "solve",
        "nodes": a.nodes,
        "method": format!("{:?}", a.method).to_lowercase(),
        "not_converged": not_converged,
        "max_abs_diff": (a.method == Method::Both).then_some(max_diff),
        "max_rel_diff": (a.method == Method::Both).then_some(rel_diff),
    });
    let status = if !not_converged.is_empty() {
        Err(CliError::Convergence(format!(
            "outer series did not converge at {} of {} points",
            not_converged.len(),
            xs.len()
        )))
    } else if a.method == Method::Both && !(rel_diff <= a.cross_tol) {
        Err(CliError::CrossCheck {
            diff: rel_diff,
            tol: a.cross_tol,
        })
    } else {
        Ok(())
    };
    Ok((t, status))
}
