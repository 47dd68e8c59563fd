//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use conic_dual_core::certify::{check_envelope, BoundConstants, BoundFamily, Slack};
use conic_dual_core::Method;

use crate::config::{BenchConfig, SolveSettings, X0};
use crate::experiment::{run_bench, solve};
use crate::generator::{generate_problem, ConeKind, Family, GeneratorSpec};
use crate::problem_file::{load_problem, save_problem, write_problem};
use crate::report::{load_json, save_json, EnvelopeVerdict, RunReport};
use crate::trace_csv::{load_trace, to_iteration_trace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "conic-dual",
    version,
    about = "Dual first-order methods for strongly convex conic programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random problem file.
    Generate(GenerateArgs),
    /// Solve one problem; writes a trace CSV and a JSON report.
    Solve(SolveArgs),
    /// Run a batch described by a TOML file.
    Bench(BenchArgs),
    /// Check a trace CSV against convergence envelopes.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct GeneratorFlags {
    /// Problem family: num, res or qp.
    #[arg(long)]
    pub family: Option<Family>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Constraint count (default 3n/2).
    #[arg(long)]
    pub p: Option<usize>,
    /// Cone: zero, nonneg, nonpos or soc.
    #[arg(long, default_value = "nonpos")]
    pub cone: ConeKind,
    /// Nonzeros per row of G.
    #[arg(long)]
    pub sparsity: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub gamma_abs: f64,
}

impl GeneratorFlags {
    fn spec(&self) -> Result<Option<GeneratorSpec>> {
        match (self.family, self.n) {
            (Some(family), Some(n)) => Ok(Some(GeneratorSpec {
                n,
                p: self.p,
                family,
                cone: self.cone,
                sparsity: self.sparsity,
                seed: self.seed,
                gamma_abs: self.gamma_abs,
            })),
            (None, None) => Ok(None),
            _ => bail!("--family and --n go together"),
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub generator: GeneratorFlags,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SolverFlags {
    /// dg, dfg, rdfg, regdfg or hybrid.
    #[arg(long)]
    pub method: Option<String>,
    /// Accuracy (default 1e-2).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Iteration limit (default 15000).
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Recovery the stopping rule waits for: last, avg or both.
    #[arg(long)]
    pub recovery: Option<String>,
    /// Stopping combination: both, either or never.
    #[arg(long)]
    pub stop_rule: Option<String>,
    /// Starting multiplier: one value for every entry or a comma-separated vector.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long)]
    pub inner_tol: Option<f64>,
    #[arg(long)]
    pub inner_max_iter: Option<usize>,
    /// Constant dual step for dg.
    #[arg(long)]
    pub step: Option<f64>,
    /// Error-bound constant; sets the rdfg epoch length.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub restart_interval: Option<usize>,
    /// Restart rdfg from the reference optimum gap.
    #[arg(long)]
    pub adaptive_restart: bool,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Known distance from x0 to the optimal multipliers.
    #[arg(long)]
    pub r_d: Option<f64>,
    /// Fast steps before the hybrid switches to plain steps.
    #[arg(long)]
    pub hybrid_k: Option<usize>,
    /// Force (true) or skip (false) the reference optimum.
    #[arg(long)]
    pub reference: Option<bool>,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

impl SolverFlags {
    pub fn settings(&self) -> Result<SolveSettings> {
        Ok(SolveSettings {
            method: self.method.clone(),
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            recovery: self.recovery.clone(),
            stop_rule: self.stop_rule.clone(),
            x0: self.x0.as_deref().map(X0::parse).transpose()?,
            inner_tol: self.inner_tol,
            inner_max_iter: self.inner_max_iter,
            step: self.step,
            kappa: self.kappa,
            restart_interval: self.restart_interval,
            adaptive_restart: self.adaptive_restart.then_some(true),
            contraction: None,
            delta: self.delta,
            r_d: self.r_d,
            hybrid_k: self.hybrid_k,
            reference: self.reference,
            trace_out: self.trace_out.clone(),
            report_out: self.report_out.clone(),
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem file; alternatively generate one with --family and --n.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[command(flatten)]
    pub generator: GeneratorFlags,
    /// Settings TOML; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Batch TOML.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Report of the run that produced the trace; supplies the constants.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Envelope family (repeatable); all applicable ones when absent.
    #[arg(long = "family")]
    pub families: Vec<String>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub l_d: Option<f64>,
    #[arg(long)]
    pub l_g: Option<f64>,
    #[arg(long)]
    pub r_d: Option<f64>,
    #[arg(long)]
    pub x0_norm: Option<f64>,
    #[arg(long)]
    pub sigma_f: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub f_star: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub hybrid_k: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub slack: f64,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Bench(a) => bench(a),
        Command::Check(a) => check(a),
    }
}

fn generate(a: GenerateArgs) -> Result<i32> {
    let spec = a
        .generator
        .spec()?
        .context("generate needs --family and --n")?;
    let problem = generate_problem(&spec)?;
    match &a.out {
        Some(path) => save_problem(&problem, path)?,
        None => write_problem(&problem, std::io::stdout().lock())?,
    }
    Ok(EXIT_OK)
}

fn solve_cmd(a: SolveArgs) -> Result<i32> {
    let spec = a.generator.spec()?;
    let (problem, source) = match (&a.problem, spec) {
        (Some(path), None) => (load_problem(path)?, path.display().to_string()),
        (None, Some(spec)) => {
            let name = format!("{}-n{}-{}-s{}", spec.family, spec.n, spec.cone, spec.seed);
            (generate_problem(&spec)?, name)
        }
        (Some(_), Some(_)) => bail!("give either --problem or --family/--n, not both"),
        (None, None) => bail!("solve needs --problem or --family and --n"),
    };
    let mut settings = match &a.config {
        Some(path) => SolveSettings::load(path)?,
        None => SolveSettings::default(),
    };
    settings.overlay(&a.solver.settings()?);
    let out = solve(&problem, &settings, &source)?;
    let text = serde_json::to_string_pretty(&out.report)?;
    match &settings.report_out {
        Some(path) => save_json(&out.report, path)?,
        None => writeln!(std::io::stdout().lock(), "{text}")?,
    }
    Ok(if out.report.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn bench(a: BenchArgs) -> Result<i32> {
    let mut cfg = BenchConfig::load(&a.config)?;
    if a.trace_dir.is_some() {
        cfg.trace_dir = a.trace_dir.clone();
    }
    if a.jobs.is_some() {
        cfg.jobs = a.jobs;
    }
    if a.epsilon.is_some() {
        cfg.solver.epsilon = a.epsilon;
    }
    if a.max_iter.is_some() {
        cfg.solver.max_iter = a.max_iter;
    }
    let report = run_bench(&cfg)?;
    match &a.report_out {
        Some(path) => save_json(&report, path)?,
        None => writeln!(
            std::io::stdout().lock(),
            "{}",
            serde_json::to_string_pretty(&report)?
        )?,
    }
    for e in report.runs.iter().filter_map(|r| r.error.as_ref()) {
        eprintln!("run failed: {e}");
    }
    Ok(if report.runs.iter().all(|r| r.converged) {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn pick<T>(flag: Option<T>, from_report: Option<T>, what: &str) -> Result<T> {
    flag.or(from_report).with_context(|| {
        format!(
            "missing {what}: pass --{} or --report",
            what.replace('_', "-")
        )
    })
}

fn check(a: CheckArgs) -> Result<i32> {
    let report: Option<RunReport> = a.report.as_deref().map(load_json).transpose()?;
    let rc = report.as_ref().map(|r| &r.constants);
    let method: Method = pick(
        a.method.clone(),
        report.as_ref().map(|r| r.method.clone()),
        "method",
    )?
    .parse()?;
    let l_d = pick(a.l_d, rc.map(|c| c.l_d), "l_d")?;
    let mut consts = BoundConstants::new(
        l_d,
        pick(a.r_d, rc.and_then(|c| c.r_d), "r_d")?,
        pick(a.x0_norm, rc.map(|c| c.x0_norm), "x0_norm")?,
        pick(a.sigma_f, rc.map(|c| c.sigma_f), "sigma_f")?,
    );
    consts.l_g = a.l_g.or(rc.map(|c| c.l_g)).unwrap_or(l_d);
    consts.kappa = a.kappa.or(rc.and_then(|c| c.kappa));
    consts.delta = a.delta.or(rc.and_then(|c| c.delta));
    consts.epsilon = a.epsilon.or(rc.map(|c| c.epsilon));
    consts.hybrid_split = a.hybrid_k.or(rc.and_then(|c| c.hybrid_k));
    let f_star = a.f_star.or(rc.and_then(|c| c.f_star));

    let rows = load_trace(&a.trace)?;
    let trace = to_iteration_trace(&rows, method, f_star, consts.hybrid_split)?;
    let slack = Slack {
        relative: a.slack,
        ..Slack::default()
    };
    let explicit = !a.families.is_empty();
    let families: Vec<BoundFamily> = if explicit {
        a.families
            .iter()
            .map(|f| f.parse())
            .collect::<Result<_, _>>()?
    } else {
        BoundFamily::ALL.to_vec()
    };
    let mut verdicts = Vec::new();
    for fam in families {
        match check_envelope(&trace, fam, &consts, slack) {
            Ok(env) => verdicts.push(EnvelopeVerdict::from(&env)),
            Err(e) if explicit => return Err(e.into()),
            Err(_) => {}
        }
    }
    if verdicts.is_empty() {
        bail!("no envelope applies to this {method} trace with the given constants");
    }
    let text = serde_json::to_string_pretty(&verdicts)?;
    match &a.report_out {
        Some(path) => save_json(&verdicts, path)?,
        None => writeln!(std::io::stdout().lock(), "{text}")?,
    }
    Ok(if verdicts.iter().all(|v| v.holds) {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}
