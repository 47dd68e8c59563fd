//! Single runs and seeded batches.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{Context, Result};
use conic_dual_core::certify::{
    check_envelope, reference_solution, BoundConstants, BoundFamily, ReferenceSolution, Slack,
};
use conic_dual_core::methods::{self, Clock, MonitorReference, NoObserver, Recovery, Termination};
use conic_dual_core::{Cone, ConicProblem, Method, RunOutcome, SimpleSet};

use crate::config::{BenchConfig, SolveSettings};
use crate::generator::{generate_problem, GeneratorSpec};
use crate::problem_file::load_problem;
use crate::report::{
    finite, BenchReport, BenchRun, Certificates, Constants, EnvelopeVerdict, ProblemSummary,
    RunReport, TableEntry, STOP_RULE_NOTE,
};
use crate::trace_csv::save_trace;

/// Problems up to this size get a reference optimum unless told otherwise.
pub const AUTO_REFERENCE_MAX_N: usize = 200;

/// Monotonic wall clock for trace timestamps.
#[derive(Debug, Clone, Copy)]
pub struct WallClock {
    origin: Instant,
}

impl WallClock {
    pub fn start() -> Self {
        WallClock {
            origin: Instant::now(),
        }
    }
}

impl Clock for WallClock {
    fn now_ns(&self) -> u64 {
        self.origin.elapsed().as_nanos() as u64
    }
}

pub struct SolveOutput {
    pub outcome: RunOutcome,
    pub reference: Option<ReferenceSolution>,
    pub report: RunReport,
}

pub fn summarize_problem(problem: &ConicProblem, source: &str) -> ProblemSummary {
    let cone = match problem.cone() {
        Cone::Zero(_) => "zero",
        Cone::Nonneg(_) => "nonneg",
        Cone::Nonpos(_) => "nonpos",
        Cone::SecondOrder(_) => "soc",
    };
    ProblemSummary {
        n: problem.n(),
        p: problem.p(),
        cone: cone.into(),
        set: problem.set().name().into(),
        objective: if problem.objective().is_quadratic() {
            "quadratic".into()
        } else {
            "quadlog".into()
        },
        source: source.into(),
    }
}

/// Envelope families that apply to runs of `method` on `problem`.
pub fn applicable_families(method: Method, problem: &ConicProblem) -> Vec<BoundFamily> {
    use BoundFamily::*;
    let whole = matches!(problem.set(), SimpleSet::Whole(_));
    let equality = matches!(problem.cone(), Cone::Zero(_));
    let mut out = Vec::new();
    match method {
        Method::Dg => {
            out.extend([
                DgDualGap,
                DgLastInfeas,
                DgLastSubopt,
                DgAvgInfeas,
                DgAvgSuboptLower,
                DgAvgSuboptUpper,
                DgAvgDistance,
                EbDgDistance,
                EbDgGap,
            ]);
            if whole && equality {
                out.extend([Lin2kDgInfeas, Lin2kDgSubopt]);
            } else if whole {
                out.extend([Cone2kDgInfeas, Cone2kDgSuboptLower, Cone2kDgSuboptUpper]);
            }
        }
        Method::Dfg => out.extend([
            DfgDualGap,
            DfgLastInfeas,
            DfgLastSubopt,
            DfgAvgInfeas,
            DfgAvgSubopt,
        ]),
        Method::Hybrid if whole && equality => out.extend([LinHybridInfeas, LinHybridSubopt]),
        Method::Hybrid if whole => out.extend([
            ConeHybridInfeas,
            ConeHybridSuboptLower,
            ConeHybridSuboptUpper,
        ]),
        Method::RegDfg => out.push(RegDfgInfeas),
        _ => {}
    }
    out
}

pub fn bound_constants(
    outcome: &RunOutcome,
    r_d: f64,
    x0_norm: f64,
    settings: &SolveSettings,
) -> BoundConstants {
    let mut c = BoundConstants::new(outcome.l_d, r_d, x0_norm, outcome.sigma_f);
    c.l_g = outcome.l_g;
    c.kappa = settings.kappa;
    c.delta = outcome.delta;
    c.epsilon = Some(settings.epsilon.unwrap_or(1e-2));
    c.hybrid_split = settings.hybrid_k;
    c
}

/// Runs one configured method on `problem`, optionally computing a
/// reference optimum, checking envelopes and writing the trace.
pub fn solve(
    problem: &ConicProblem,
    settings: &SolveSettings,
    source: &str,
) -> Result<SolveOutput> {
    let p = problem.p();
    let x0 = match &settings.x0 {
        Some(x) => x.resolve(p)?,
        None => vec![0.0; p],
    };
    let x0_norm = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let want_ref = settings
        .reference
        .unwrap_or(problem.n() <= AUTO_REFERENCE_MAX_N || settings.wants_adaptive_restart());
    let reference = if want_ref {
        Some(reference_solution(problem, &x0).context("computing the reference optimum")?)
    } else {
        None
    };
    let mut config = settings.solver_config(p, reference.as_ref().map(|r| r.f_star))?;
    if let Some(r) = &reference {
        config.monitor = Some(MonitorReference {
            x_star: r.x_star.clone(),
            u_star: r.u_star.clone(),
            f_star: r.f_star,
        });
    }
    let clock = WallClock::start();
    let outcome = methods::run_with(problem, &config, &clock, &mut NoObserver)?;
    let wall_ns = clock.now_ns();

    let mut envelopes = Vec::new();
    if let Some(r) = &reference {
        let consts = bound_constants(&outcome, r.r_d, x0_norm, settings);
        for fam in applicable_families(config.method, problem) {
            // Families whose constants were not supplied (κ, split) are skipped.
            if let Ok(env) = check_envelope(&outcome.trace, fam, &consts, Slack::default()) {
                envelopes.push(EnvelopeVerdict::from(&env));
            }
        }
    }

    let trace_path = match &settings.trace_out {
        Some(path) => {
            save_trace(&outcome.trace, path)?;
            Some(path.display().to_string())
        }
        None => None,
    };

    let rows = &outcome.trace.rows;
    let last = rows.last().expect("trace always has the starting row");
    let ds = if rows.len() >= 2 {
        (last.d - rows[rows.len() - 2].d).abs()
    } else {
        f64::NAN
    };
    let fs = reference.as_ref().map(|r| r.f_star);
    let certificates = Certificates {
        d: finite(last.d),
        ds: finite(ds),
        infeas_last: finite(last.infeas_last),
        infeas_avg: finite(last.infeas_avg),
        f_last: finite(last.f_last),
        f_avg: finite(last.f_avg),
        subopt_last: fs.and_then(|f| finite(last.f_last - f)),
        subopt_avg: fs.and_then(|f| finite(last.f_avg - f)),
        gradmap_norm: finite(last.gradmap_norm),
    };
    let constants = Constants {
        l_d: outcome.l_d,
        l_g: outcome.l_g,
        sigma_f: outcome.sigma_f,
        x0_norm,
        f_star: fs,
        r_d: reference.as_ref().map(|r| r.r_d),
        reference_source: reference.as_ref().map(|r| format!("{:?}", r.source)),
        reference_kkt: reference.as_ref().map(|r| r.kkt.max()),
        kappa: settings.kappa,
        delta: outcome.delta,
        epsilon: config.epsilon,
        hybrid_k: config.hybrid_split,
        regdfg_budget: outcome.reg_budget,
        restart_interval: outcome.restart_interval,
        r_d_estimate: outcome.r_d_estimate,
    };
    let mut echo = settings.clone();
    echo.method = Some(config.method.name().into());
    let report = RunReport {
        method: config.method.name().into(),
        config: echo,
        problem: summarize_problem(problem, source),
        termination: match outcome.termination {
            Termination::Converged => "converged".into(),
            Termination::IterationLimit => "iteration_limit".into(),
        },
        converged: outcome.converged(),
        iterations: last.k,
        stop_last: outcome.stop_last,
        stop_avg: outcome.stop_avg,
        stop_rule_note: STOP_RULE_NOTE.into(),
        certificates,
        constants,
        envelopes,
        restarts: outcome.state.restart_count,
        trace_path,
        wall_ns,
    };
    Ok(SolveOutput {
        outcome,
        reference,
        report,
    })
}

enum Instance {
    Generated(GeneratorSpec),
    File(PathBuf),
}

impl Instance {
    fn name(&self) -> String {
        match self {
            Instance::Generated(s) => format!("{}-n{}-{}-s{}", s.family, s.n, s.cone, s.seed),
            Instance::File(p) => p.display().to_string(),
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Instance::Generated(s) => Some(s.seed),
            Instance::File(_) => None,
        }
    }

    fn load(&self) -> Result<ConicProblem> {
        match self {
            Instance::Generated(s) => generate_problem(s),
            Instance::File(p) => load_problem(p),
        }
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Runs every method once per instance. A run serves all requested
/// recoveries: the dual iterates do not depend on the recovery, so the
/// iteration at which each recovery first passes the stopping rule is read
/// off a single trajectory that continues until all of them have stopped.
fn run_instance(cfg: &BenchConfig, inst: &Instance, recoveries: &[Recovery]) -> Vec<BenchRun> {
    let name = inst.name();
    let mut runs = Vec::new();
    let problem = inst.load();
    let union = match (
        recoveries.contains(&Recovery::Last),
        recoveries.contains(&Recovery::Average),
    ) {
        (true, true) => Recovery::Both,
        (true, false) => Recovery::Last,
        _ => Recovery::Average,
    };
    for m in &cfg.methods {
        let mut settings = cfg.solver.clone();
        settings.method = Some(m.clone());
        settings.recovery = Some(
            match union {
                Recovery::Both => "both",
                Recovery::Last => "last",
                Recovery::Average => "avg",
            }
            .into(),
        );
        if settings.reference.is_none() {
            settings.reference = Some(settings.wants_adaptive_restart());
        }
        settings.report_out = None;
        settings.trace_out = cfg
            .trace_dir
            .as_ref()
            .map(|d| d.join(format!("{}-{}.csv", file_stem(&name), m)));
        let result = problem
            .as_ref()
            .map_err(|e| anyhow::anyhow!("{e:#}"))
            .and_then(|p| solve(p, &settings, &name));
        for rec in recoveries {
            let rec_name = if *rec == Recovery::Last {
                "last"
            } else {
                "avg"
            };
            let run = match &result {
                Ok(out) => {
                    let (stop, infeas) = match rec {
                        Recovery::Last => {
                            (out.outcome.stop_last, out.report.certificates.infeas_last)
                        }
                        _ => (out.outcome.stop_avg, out.report.certificates.infeas_avg),
                    };
                    BenchRun {
                        instance: name.clone(),
                        seed: inst.seed(),
                        method: m.clone(),
                        recovery: rec_name.into(),
                        converged: stop.is_some(),
                        iterations: stop,
                        infeasibility: infeas,
                        error: None,
                        trace_path: out.report.trace_path.clone(),
                        wall_ns: out.report.wall_ns,
                    }
                }
                Err(e) => BenchRun {
                    instance: name.clone(),
                    seed: inst.seed(),
                    method: m.clone(),
                    recovery: rec_name.into(),
                    converged: false,
                    iterations: None,
                    infeasibility: None,
                    error: Some(format!("{e:#}")),
                    trace_path: None,
                    wall_ns: 0,
                },
            };
            runs.push(run);
        }
    }
    runs
}

/// Runs the (instance × method × recovery) grid of `cfg`. Per-run failures
/// are recorded in the report.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let recoveries: Vec<Recovery> = cfg
        .recoveries
        .iter()
        .map(|r| r.parse::<Recovery>())
        .collect::<std::result::Result<_, _>>()?;
    if let Some(dir) = &cfg.trace_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut instances = Vec::new();
    if let Some(spec) = &cfg.generator {
        for &seed in &cfg.seeds {
            let mut s = spec.clone();
            s.seed = seed;
            instances.push(Instance::Generated(s));
        }
    }
    instances.extend(cfg.problems.iter().cloned().map(Instance::File));

    let jobs = cfg
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, instances.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Vec<BenchRun>>>> = Mutex::new(vec![None; instances.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= instances.len() {
                    break;
                }
                let runs = run_instance(cfg, &instances[i], &recoveries);
                results
                    .lock()
                    .expect("no worker panics while holding the lock")[i] = Some(runs);
            });
        }
    });
    let runs: Vec<BenchRun> = results
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .flat_map(|r| r.unwrap_or_default())
        .collect();

    let mut table = Vec::new();
    for m in &cfg.methods {
        for r in &cfg.recoveries {
            let rec = if r.parse::<Recovery>()? == Recovery::Last {
                "last"
            } else {
                "avg"
            };
            let cell: Vec<&BenchRun> = runs
                .iter()
                .filter(|x| &x.method == m && x.recovery == rec)
                .collect();
            let its: Vec<f64> = cell
                .iter()
                .filter_map(|x| x.iterations)
                .map(|k| k as f64)
                .collect();
            table.push(TableEntry {
                method: m.clone(),
                recovery: rec.into(),
                runs: cell.len(),
                converged: its.len(),
                mean_iterations: (!its.is_empty())
                    .then(|| its.iter().sum::<f64>() / its.len() as f64),
            });
        }
    }
    Ok(BenchReport {
        config: cfg.clone(),
        stop_rule_note: STOP_RULE_NOTE.into(),
        runs,
        table,
    })
}
