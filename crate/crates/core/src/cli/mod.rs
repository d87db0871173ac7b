//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input errors, 2 uncertified solve,
//! 3 failed verification (including oracle disagreement).

mod problem_file;
mod report;

pub use problem_file::{load_problem_file, parse_problem, problem_to_json, Exact, OperatorSpec, ProblemFile, VSpec};
pub use report::{write_grid_csv, Report};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::benchmarks::{
    gp_canonical_g, gp_decompose, gp_inverse_identity, gp_objective, gp_product_identity, gp_solve_h,
    gp_solve_with, thc_complementary_identity, thc_dual, thc_dual_by_elimination, thc_level1_identity,
    thc_level2_identity, thc_objective, thc_solve_with, BenchmarkError, OracleCheck, OracleSettings,
    SolveReport, ThcDual,
};
use crate::canonical::{CanonicalError, CanonicalProblem, GAP_TOL};
use crate::dual_solver::{solve_canonical, Certificate, SolverConfig, SolverError};
use crate::oracle::{grid_scan, multistart, OracleError, OracleResult, SearchBox};
use crate::par::Execution;
use crate::polynomial::{MultiPoly, PolyError, Rational};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{}: {msg}", path.display())]
    Invalid { path: PathBuf, msg: String },
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Parse { .. } | CliError::Invalid { .. } => 1,
            CliError::Solver(_) | CliError::Benchmark(BenchmarkError::Solver(_)) => 2,
            _ => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "canondual", version, about = "Canonical dual global optimization of small polynomial problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a benchmark or a problem file and print a report
    Solve(SolveArgs),
    /// Run the exact identity checks and duality checks
    Verify(VerifyArgs),
    /// Run the grid and multistart oracles only
    Oracle(OracleArgs),
    /// Export objective values on a lattice as CSV
    Grid(GridArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ProblemKind {
    Gp,
    Thc,
    File,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Args, Debug)]
struct Target {
    #[arg(value_enum)]
    problem: ProblemKind,
    /// Problem file (only with `file`)
    path: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Enable the multistart cross-check (default)
    #[arg(long, overrides_with = "no_oracle")]
    oracle: bool,
    #[arg(long, overrides_with = "oracle")]
    no_oracle: bool,
    /// Worker threads for the oracle
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    target: Target,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    target: Target,
    /// Bounds as `lo0 hi0 lo1 hi1 ...`
    #[arg(long = "box", num_args = 2.., allow_negative_numbers = true, value_name = "BOUND")]
    bounds: Option<Vec<f64>>,
    /// Nodes per axis for the grid scan (skipped if absent)
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = 64)]
    starts: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long = "box", num_args = 2.., allow_negative_numbers = true, value_name = "BOUND")]
    bounds: Option<Vec<f64>>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

enum Loaded {
    Gp,
    Thc,
    File(Box<CanonicalProblem>),
}

impl Loaded {
    fn from_target(t: &Target) -> Result<Self, CliError> {
        match (t.problem, &t.path) {
            (ProblemKind::Gp, None) => Ok(Loaded::Gp),
            (ProblemKind::Thc, None) => Ok(Loaded::Thc),
            (ProblemKind::File, Some(p)) => Ok(Loaded::File(Box::new(load_problem_file(p)?))),
            (ProblemKind::File, None) => Err(CliError::Usage("`file` needs a path".into())),
            (_, Some(_)) => Err(CliError::Usage("a path is only accepted with `file`".into())),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Loaded::Gp => "gp",
            Loaded::Thc => "thc",
            Loaded::File(_) => "file",
        }
    }

    fn objective(&self) -> Result<MultiPoly, CliError> {
        Ok(match self {
            Loaded::Gp => gp_objective(),
            Loaded::Thc => thc_objective(),
            Loaded::File(pr) => pr.primal_polynomial()?,
        })
    }

    fn default_box(&self) -> SearchBox {
        match self {
            Loaded::Gp => OracleSettings::goldstein_price().search_box,
            Loaded::Thc => OracleSettings::three_hump().search_box,
            Loaded::File(pr) => SearchBox::cube(pr.dim(), -10.0, 10.0).expect("non-empty box"),
        }
    }

    fn search_box(&self, bounds: Option<&[f64]>) -> Result<SearchBox, CliError> {
        let Some(b) = bounds else {
            return Ok(self.default_box());
        };
        if b.len() % 2 != 0 {
            return Err(CliError::Usage("--box needs pairs of bounds".into()));
        }
        let (lo, hi): (Vec<f64>, Vec<f64>) = b.chunks(2).map(|c| (c[0], c[1])).unzip();
        SearchBox::new(lo, hi).map_err(|e| CliError::Usage(format!("--box: {e}")))
    }

    fn solve(&self, cfg: &SolverConfig, oracle: Option<OracleSettings>) -> Result<SolveReport, CliError> {
        match self {
            Loaded::Gp => Ok(gp_solve_with(cfg, oracle.as_ref())?),
            Loaded::Thc => Ok(thc_solve_with(cfg, oracle.as_ref())?),
            Loaded::File(pr) => {
                let rep = solve_canonical(pr, cfg)?;
                let oracle = oracle
                    .map(|o| OracleCheck::run(&pr.primal_polynomial()?, &o, rep.primal))
                    .transpose()?;
                Ok(SolveReport {
                    problem_name: "file",
                    transformed_solution: rep.x_bar.clone(),
                    x_star: rep.x_bar.clone(),
                    value: rep.primal,
                    dual_report: rep,
                    oracle,
                })
            }
        }
    }
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::default();
        if let Some(t) = self.grad_tol {
            cfg.grad_tol = t;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    fn oracle_settings(&self, target: &Loaded) -> Option<OracleSettings> {
        (!self.no_oracle).then(|| OracleSettings {
            search_box: target.default_box(),
            starts: 64,
            seed: 42,
            exec: Execution::default(),
        })
    }
}

/// Runs `f` on a pool of `threads` workers when given.
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
            Ok(pool.install(f))
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(f()),
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Oracle(a) => cmd_oracle(&a, out),
        Command::Grid(a) => cmd_grid(&a, out),
    }
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let target = Loaded::from_target(&a.target)?;
    let cfg = a.solver.config()?;
    let oracle = a.solver.oracle_settings(&target);
    let rep = with_threads(a.solver.threads, || target.solve(&cfg, oracle))??;
    let report = Report::new(target.name(), &rep, &cfg);
    let mut text = match a.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    emit(out, &text)?;
    Ok(solve_exit_code(&rep))
}

fn solve_exit_code(rep: &SolveReport) -> i32 {
    if rep.oracle.as_ref().is_some_and(|o| !o.agreement) {
        3
    } else if rep.dual_report.certificate != Certificate::GlobalMinimumCertified {
        2
    } else {
        0
    }
}

struct Check {
    name: String,
    outcome: Result<(), String>,
}

impl Check {
    fn new(name: impl Into<String>, outcome: Result<(), String>) -> Self {
        Check {
            name: name.into(),
            outcome,
        }
    }

    fn flag(name: impl Into<String>, ok: bool, detail: impl FnOnce() -> String) -> Self {
        Self::new(name, if ok { Ok(()) } else { Err(detail()) })
    }
}

fn identity_check<E: std::fmt::Display>(
    name: &str,
    r: Result<crate::benchmarks::IdentityCheck, E>,
) -> Check {
    let outcome = match r {
        Ok(c) if c.holds => Ok(()),
        Ok(c) => Err(match c.mismatch {
            Some((m, l, r)) => format!("differs at {m:?}: {l} vs {r}"),
            None => "differs".into(),
        }),
        Err(e) => Err(e.to_string()),
    };
    Check::new(name, outcome)
}

fn solution_checks(checks: &mut Vec<Check>, rep: &SolveReport) {
    let d = &rep.dual_report;
    checks.push(Check::flag(
        "primal, complementary and dual values agree",
        d.gap <= GAP_TOL * (1.0 + d.primal.abs()),
        || format!("gap {:e}", d.gap),
    ));
    checks.push(Check::flag(
        "global minimum certified",
        d.certificate == Certificate::GlobalMinimumCertified,
        || format!("{:?}", d.certificate),
    ));
    if let Some(o) = &rep.oracle {
        checks.push(Check::flag("oracle agrees with dual solution", o.agreement, || {
            format!("oracle {} vs {}", o.value, rep.value)
        }));
    }
}

/// Deterministic strictly feasible sample points for the Three-Hump dual.
fn thc_sample_points() -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for i in 0..7 {
        let s1 = -0.3 + 0.1 * f64::from(i);
        for j in 0..5 {
            let s2 = 25.0 * s1 * s1 - 2.6 + 0.25 + f64::from(j);
            pts.push((s1, s2));
        }
    }
    pts
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let target = Loaded::from_target(&a.target)?;
    let cfg = a.solver.config()?;
    let mut checks = Vec::new();
    match &target {
        Loaded::Gp => {
            checks.push(identity_check("h(s)·g(t) equals f1 under (s, t) = T(x, y)", gp_product_identity()));
            checks.push(match gp_inverse_identity() {
                Ok(ok) => Check::flag("T_inv·T = I", ok, || "not the identity".into()),
                Err(e) => Check::new("T_inv·T = I", Err(e.to_string())),
            });
            checks.push(Check::new(
                "min h > 0 and min g > 0",
                gp_decompose().map(|_| ()).map_err(|e| e.to_string()),
            ));
            checks.push(Check::new(
                "h > 0 at every critical point",
                gp_solve_h().map(|_| ()).map_err(|e| e.to_string()),
            ));
            checks.push(Check::new(
                "V(Λ(t)) − U(t) equals g(t)",
                gp_canonical_g().map(|_| ()).map_err(|e| e.to_string()),
            ));
        }
        Loaded::Thc => {
            checks.push(identity_check("6·f2 = V1(Λ1) − U1", thc_level1_identity()));
            checks.push(identity_check("60·f2(ς1, x, y) = V2(Λ2) − U2", thc_level2_identity()));
            checks.push(identity_check("complementary function matches its construction", thc_complementary_identity()));
            let worst = thc_sample_points()
                .into_iter()
                .map(|(s1, s2)| -> Result<f64, BenchmarkError> {
                    let c = thc_dual(s1, s2)?;
                    let e = thc_dual_by_elimination(s1, s2)?;
                    Ok((c - e).abs() / (1.0 + c.abs()))
                })
                .try_fold(0.0_f64, |m, r| r.map(|v| m.max(v)));
            checks.push(Check::new(
                "closed-form dual matches elimination",
                match worst {
                    Ok(w) if w <= 1e-9 => Ok(()),
                    Ok(w) => Err(format!("relative difference {w:e}")),
                    Err(e) => Err(e.to_string()),
                },
            ));
            checks.push(Check::flag("origin is dual feasible", ThcDual.is_feasible(0.0, 0.0), || {
                "infeasible".into()
            }));
        }
        Loaded::File(pr) => {
            checks.push(legendre_check(pr));
        }
    }
    let oracle = a.solver.oracle_settings(&target);
    match with_threads(a.solver.threads, || target.solve(&cfg, oracle))? {
        Ok(rep) => solution_checks(&mut checks, &rep),
        Err(e) => checks.push(Check::new("dual solve", Err(e.to_string()))),
    }

    let mut text = String::new();
    for c in &checks {
        match &c.outcome {
            Ok(()) => text.push_str(&format!("PASS  {}\n", c.name)),
            Err(d) => text.push_str(&format!("FAIL  {}: {d}\n", c.name)),
        }
    }
    let failed = checks.iter().filter(|c| c.outcome.is_err()).count();
    text.push_str(&format!("{} of {} checks passed\n", checks.len() - failed, checks.len()));
    emit(out, &text)?;
    Ok(if failed == 0 { 0 } else { 3 })
}

/// `∇V*(∂V(ξ)) = ξ` exactly for a few `ξ` per component.
fn legendre_check(pr: &CanonicalProblem) -> Check {
    let m = pr.num_dual();
    let run = || -> Result<bool, PolyError> {
        for k in [-2, 0, 1, 3] {
            let xi = vec![Rational::from(k); m];
            let sigma = pr.v().duality_map_exact(&xi)?;
            if pr.v().conjugate_gradient_exact(&sigma)? != xi {
                return Ok(false);
            }
        }
        Ok(true)
    };
    match run() {
        Ok(ok) => Check::flag("conjugate gradient inverts the duality map", ok, || "mismatch".into()),
        Err(e) => Check::new("conjugate gradient inverts the duality map", Err(e.to_string())),
    }
}

#[derive(Serialize)]
struct OracleOutput {
    problem: &'static str,
    #[serde(rename = "box")]
    search_box: SearchBox,
    grid: Option<OracleResult>,
    multistart: OracleResult,
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let target = Loaded::from_target(&a.target)?;
    let p = target.objective()?;
    let bx = target.search_box(a.bounds.as_deref())?;
    let exec = Execution::default();
    let (grid, ms) = with_threads(a.threads, || -> Result<_, CliError> {
        let grid = a.grid.map(|n| grid_scan(&p, &bx, n, exec)).transpose()?;
        let ms = multistart(&p, &bx, a.starts, a.seed, exec)?;
        Ok((grid, ms))
    })??;
    let res = OracleOutput {
        problem: target.name(),
        search_box: bx,
        grid,
        multistart: ms,
    };
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&res).expect("plain data serializes") + "\n",
        Format::Text => {
            let mut s = format!("problem: {}\n", res.problem);
            if let Some(g) = &res.grid {
                s.push_str(&format!("grid:       {} at {:?} ({} evaluations)\n", report::num(g.value), g.x_best, g.n_evaluations));
            }
            let m = &res.multistart;
            s.push_str(&format!(
                "multistart: {} at {:?} ({} evaluations{})\n",
                report::num(m.value),
                m.x_best,
                m.n_evaluations,
                if m.refined { "" } else { ", unrefined" }
            ));
            s
        }
    };
    emit(out, &text)?;
    Ok(0)
}

fn cmd_grid(a: &GridArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let target = Loaded::from_target(&a.target)?;
    let p = target.objective()?;
    let bx = target.search_box(a.bounds.as_deref())?;
    write_grid_csv(&p, &bx, a.n, &a.out)?;
    emit(out, &format!("wrote {}\n", a.out.display()))?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("canondual").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(&[]).0, 1);
        assert_eq!(run(&["solve", "nope"]).0, 1);
        assert_eq!(run(&["solve", "file"]).0, 1);
        assert_eq!(run(&["solve", "gp", "extra.json"]).0, 1);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn solve_thc_text() {
        let (code, out, _) = run(&["solve", "thc", "--no-oracle"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("GlobalMinimumCertified"));
        assert!(out.contains("oracle:               skipped"));
    }

    #[test]
    fn oracle_flags_override() {
        let (_, out, _) = run(&["solve", "thc", "--no-oracle", "--oracle", "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["oracle"]["agreement"].as_bool().unwrap());
    }
}
