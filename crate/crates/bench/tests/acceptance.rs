//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use conic_dual::config::{BenchConfig, SolveSettings};
use conic_dual::experiment::run_bench;
use conic_dual::generator::{generate_problem, ConeKind, Family, GeneratorSpec};
use conic_dual_core::certify::{
    check_envelope, empirical_rate_exponent, reference_solution, BoundConstants, BoundFamily,
    LemmaMonitor, ReferenceSolution, Slack,
};
use conic_dual_core::methods::{self, regularized_budget, theta_next, NoClock, Restart, StopRule};
use conic_dual_core::{ConicProblem, DualOracle, InnerOptions, Method, RunOutcome, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

struct Instance {
    name: String,
    problem: ConicProblem,
    reference: ReferenceSolution,
}

#[derive(Default)]
struct Ctx {
    instances: Vec<Instance>,
    dg: Vec<RunOutcome>,
    dfg: Vec<RunOutcome>,
    monitors: Vec<(String, LemmaMonitor)>,
}

const SMALL_ITERS: usize = 2000;

fn qp(n: usize, p: usize, cone: ConeKind, seed: u64) -> ConicProblem {
    let mut s = GeneratorSpec::new(Family::Qp, n, seed);
    s.p = Some(p);
    s.cone = cone;
    generate_problem(&s).expect("generator")
}

fn consts(out: &RunOutcome, r: &ReferenceSolution) -> BoundConstants {
    let mut c = BoundConstants::new(out.l_d, r.r_d, 0.0, out.sigma_f);
    c.l_g = out.l_g;
    c
}

fn envelope(out: &RunOutcome, fam: BoundFamily, c: &BoundConstants) -> Result<f64, String> {
    let env = check_envelope(&out.trace, fam, c, Slack::default()).map_err(|e| e.to_string())?;
    if env.points.is_empty() {
        return Err(format!("{fam}: nothing checked"));
    }
    match env.violated_at {
        None => Ok(env.worst_ratio),
        Some(k) => Err(format!(
            "{fam} violated at k = {k} ({} rows)",
            env.violations
        )),
    }
}

fn long_run(
    method: Method,
    problem: &ConicProblem,
    r: &ReferenceSolution,
    mon: &mut LemmaMonitor,
) -> RunOutcome {
    let mut c = SolverConfig::new(method);
    c.stop_rule = StopRule::Never;
    c.max_iter = SMALL_ITERS;
    let mut out = methods::run_with(problem, &c, &NoClock, mon).expect("run");
    out.trace.f_star = Some(r.f_star);
    out
}

fn c1_dg_gap(ctx: &mut Ctx) -> Check {
    let start = Instant::now();
    for (i, cone) in [ConeKind::Zero, ConeKind::Nonpos].into_iter().enumerate() {
        for seed in 1..=10u64 {
            let problem = qp(20, 10, cone, 100 * i as u64 + seed);
            let reference = reference_solution(&problem, &[0.0; 10]).map_err(|e| e.to_string())?;
            ctx.instances.push(Instance {
                name: format!("{cone}-s{seed}"),
                problem,
                reference,
            });
        }
    }
    let mut worst: f64 = 0.0;
    for inst in &ctx.instances {
        let mut mon = LemmaMonitor::from_reference(&inst.reference, 1e-8);
        let out = long_run(Method::Dg, &inst.problem, &inst.reference, &mut mon);
        let ratio = envelope(&out, BoundFamily::DgDualGap, &consts(&out, &inst.reference))
            .map_err(|e| format!("{}: {e}", inst.name))?;
        worst = worst.max(ratio);
        ctx.dg.push(out);
        ctx.monitors.push((format!("dg {}", inst.name), mon));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!("took {secs:.1} s"));
    }
    Ok(format!(
        "{} instances x {SMALL_ITERS} iterations, worst gap/bound {worst:.3}, {secs:.2} s",
        ctx.instances.len()
    ))
}

fn c2_dfg_gap(ctx: &mut Ctx) -> Check {
    let mut worst: f64 = 0.0;
    for inst in &ctx.instances {
        let mut mon = LemmaMonitor::from_reference(&inst.reference, 1e-8);
        let out = long_run(Method::Dfg, &inst.problem, &inst.reference, &mut mon);
        let ratio = envelope(
            &out,
            BoundFamily::DfgDualGap,
            &consts(&out, &inst.reference),
        )
        .map_err(|e| format!("{}: {e}", inst.name))?;
        worst = worst.max(ratio);
        ctx.dfg.push(out);
        ctx.monitors.push((format!("dfg {}", inst.name), mon));
    }
    Ok(format!(
        "{} instances, worst gap/bound {worst:.3}",
        ctx.dfg.len()
    ))
}

fn c3_lemmas(ctx: &mut Ctx) -> Check {
    if ctx.monitors.len() != 40 {
        return Err(format!(
            "expected 40 monitored runs, found {}",
            ctx.monitors.len()
        ));
    }
    let mut checks = 0;
    for (name, mon) in &ctx.monitors {
        checks += mon.checks();
        if let Some(v) = mon.violations().first() {
            return Err(format!(
                "{name}: {:?} at k = {} (lhs {:.3e}, rhs {:.3e}; {} violations)",
                v.lemma,
                v.k,
                v.lhs,
                v.rhs,
                mon.violations().len()
            ));
        }
    }
    Ok(format!(
        "{checks} inequality checks over 40 runs, no violations"
    ))
}

fn c4_theta() -> Check {
    let mut theta = 1.0;
    let mut sum = 1.0;
    let mut worst: f64 = 0.0;
    for k in 1..=100_000usize {
        if k > 1 {
            theta = theta_next(theta);
            sum += theta;
        }
        let kf = k as f64;
        if theta < (kf + 1.0) / 2.0 * (1.0 - 1e-9) || theta > kf * (1.0 + 1e-9) {
            return Err(format!("theta_{k} = {theta} outside [(k+1)/2, k]"));
        }
        let rel = (sum - theta * theta).abs() / (theta * theta);
        worst = worst.max(rel);
        if rel > 1e-9 {
            return Err(format!(
                "sum of theta differs from theta^2 at k = {k} (rel {rel:.2e})"
            ));
        }
    }
    Ok(format!(
        "k <= 100000, worst relative error of S_k = theta_k^2 is {worst:.2e}"
    ))
}

fn c5_averages(ctx: &mut Ctx) -> Check {
    let mut max_upper = f64::NEG_INFINITY;
    for (i, inst) in ctx.instances.iter().enumerate() {
        let (dg, dfg) = (&ctx.dg[i], &ctx.dfg[i]);
        let tag = |e: String| format!("{}: {e}", inst.name);
        let c = consts(dg, &inst.reference);
        for fam in [
            BoundFamily::DgAvgInfeas,
            BoundFamily::DgAvgSuboptLower,
            BoundFamily::DgAvgSuboptUpper,
        ] {
            envelope(dg, fam, &c).map_err(tag)?;
        }
        envelope(
            dfg,
            BoundFamily::DfgAvgInfeas,
            &consts(dfg, &inst.reference),
        )
        .map_err(tag)?;
        for (m, out) in [("dg", dg), ("dfg", dfg)] {
            for row in out.trace.rows.iter().filter(|r| !r.f_avg.is_nan()) {
                let up = row.f_avg - inst.reference.f_star;
                max_upper = max_upper.max(up);
                if up > 1e-8 {
                    return Err(format!(
                        "{} {m}: f(avg) - f* = {up:.3e} at k = {}",
                        inst.name, row.k
                    ));
                }
            }
        }
    }
    Ok(format!(
        "DG-avg infeasibility and both suboptimality sides, DFG-avg infeasibility; max f(avg) - f* = {max_upper:.2e}"
    ))
}

fn c6_equality(ctx: &mut Ctx) -> Check {
    let splits = [1usize, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128];
    let mut exponents = Vec::new();
    let mut envelopes = 0;
    for (i, inst) in ctx
        .instances
        .iter()
        .enumerate()
        .filter(|(_, x)| x.name.starts_with("zero"))
    {
        let tag = |e: String| format!("{}: {e}", inst.name);
        envelope(
            &ctx.dg[i],
            BoundFamily::Lin2kDgInfeas,
            &consts(&ctx.dg[i], &inst.reference),
        )
        .map_err(tag)?;
        let mut series = Vec::new();
        for &k in &splits {
            let mut c = SolverConfig::new(Method::Hybrid);
            c.hybrid_split = Some(k);
            c.stop_rule = StopRule::Never;
            let mut out = methods::run(&inst.problem, &c).map_err(|e| tag(e.to_string()))?;
            out.trace.f_star = Some(inst.reference.f_star);
            let mut bc = consts(&out, &inst.reference);
            bc.hybrid_split = Some(k);
            envelope(&out, BoundFamily::LinHybridInfeas, &bc).map_err(tag)?;
            envelopes += 1;
            let v = out.trace.last().expect("rows").infeas_last;
            // Values at rounding level carry no rate information.
            if v > 1e-10 {
                series.push((k as f64, v));
            }
        }
        let fit = empirical_rate_exponent(&series, 0.5).map_err(|e| tag(e.to_string()))?;
        if fit.exponent > -1.4 {
            return Err(format!(
                "{}: hybrid infeasibility exponent {:.2}",
                inst.name, fit.exponent
            ));
        }
        exponents.push(fit.exponent);
    }
    let worst = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "even-index DG and {envelopes} hybrid envelopes hold on {} equality QPs; worst tail exponent {worst:.2}",
        exponents.len()
    ))
}

fn c7_regularized() -> Check {
    let eps = 1e-2;
    let mut worst: f64 = 0.0;
    let mut budgets = Vec::new();
    for seed in 1..=10u64 {
        let problem = qp(20, 30, ConeKind::Nonpos, 500 + seed);
        let r = reference_solution(&problem, &[0.0; 30]).map_err(|e| e.to_string())?;
        let l_d = problem
            .lipschitz_dual_constant()
            .map_err(|e| e.to_string())?;
        let delta = eps / (r.r_d * r.r_d);
        let budget = regularized_budget(l_d, delta, r.r_d, eps);
        let mut c = SolverConfig::new(Method::RegDfg);
        c.epsilon = eps;
        c.r_d = Some(r.r_d);
        c.stop_rule = StopRule::Never;
        c.max_iter = budget;
        let mut out = methods::run(&problem, &c).map_err(|e| e.to_string())?;
        out.trace.f_star = Some(r.f_star);
        if out.reg_budget != Some(budget) || out.trace.last().map(|x| x.k) != Some(budget) {
            return Err(format!("seed {seed}: run did not use the budget {budget}"));
        }
        let mut bc = consts(&out, &r);
        bc.delta = out.delta;
        bc.epsilon = Some(eps);
        let ratio = envelope(&out, BoundFamily::RegDfgInfeas, &bc)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        worst = worst.max(ratio);
        budgets.push(budget);
    }
    Ok(format!(
        "10 instances, budgets {}..{}, worst infeasibility/bound {worst:.2e}",
        budgets.iter().min().unwrap(),
        budgets.iter().max().unwrap()
    ))
}

/// `(k, f* − d(x^k))` until the gap reaches rounding level.
fn gap_series(out: &RunOutcome, f_star: f64) -> Vec<(f64, f64)> {
    let floor = 1e-10 * f_star.abs().max(1.0);
    out.trace
        .rows
        .iter()
        .skip(1)
        .take_while(|r| f_star - r.d > floor)
        .map(|r| (r.k as f64, f_star - r.d))
        .collect()
}

fn c8_linear() -> Check {
    let mut worst_r2: f64 = 1.0;
    let mut epochs = 0;
    let c2 = (-2.0f64).exp();
    for seed in 1..=10u64 {
        let problem = qp(20, 30, ConeKind::Nonpos, 700 + seed);
        let r = reference_solution(&problem, &[0.0; 30]).map_err(|e| e.to_string())?;
        let mut dg = SolverConfig::new(Method::Dg);
        dg.stop_rule = StopRule::Never;
        dg.max_iter = 20_000;
        let mut rd = SolverConfig::new(Method::Rdfg);
        rd.stop_rule = StopRule::Never;
        rd.max_iter = 5_000;
        rd.restart = Some(Restart::Adaptive {
            f_star: r.f_star,
            kappa: None,
        });
        for c in [dg, rd] {
            let out = methods::run(&problem, &c).map_err(|e| e.to_string())?;
            let series = gap_series(&out, r.f_star);
            let fit = empirical_rate_exponent(&series, 0.5)
                .map_err(|e| format!("seed {seed} {}: {e}", c.method))?;
            if !(fit.linear_slope < 0.0 && fit.linear_r_squared >= 0.95) {
                return Err(format!(
                    "seed {seed} {}: log-gap slope {:.3e}, r^2 {:.3} over {} points",
                    c.method, fit.linear_slope, fit.linear_r_squared, fit.points
                ));
            }
            worst_r2 = worst_r2.min(fit.linear_r_squared);
            let floor = 1e-10 * r.f_star.abs().max(1.0);
            for e in out
                .epochs
                .iter()
                .filter(|e| e.restarted && e.gap_start > floor)
            {
                epochs += 1;
                if e.gap_end > c2 * e.gap_start * (1.0 + 1e-12) {
                    return Err(format!(
                        "seed {seed}: epoch {} contracted only {:.3}",
                        e.epoch,
                        e.gap_end / e.gap_start
                    ));
                }
            }
        }
    }
    if epochs == 0 {
        return Err("no restarts happened".into());
    }
    Ok(format!(
        "20 fits, worst r^2 {worst_r2:.4}; {epochs} restarted epochs all contract by e^-2"
    ))
}

fn c9_tables() -> Check {
    let mut lines = Vec::new();
    for family in [Family::Num, Family::Res] {
        let mut solver = SolveSettings::default();
        solver.epsilon = Some(1e-2);
        solver.max_iter = Some(15_000);
        let cfg = BenchConfig {
            methods: vec!["dg".into(), "dfg".into()],
            recoveries: vec!["last".into(), "avg".into()],
            seeds: (1..=10).collect(),
            generator: Some(GeneratorSpec::new(family, 50, 0)),
            problems: Vec::new(),
            solver,
            trace_dir: None,
            jobs: None,
        };
        let report = run_bench(&cfg).map_err(|e| format!("{e:#}"))?;
        let (mut fast_first, mut last_first) = (0, 0);
        let mut instances: Vec<&str> = report.runs.iter().map(|r| r.instance.as_str()).collect();
        instances.dedup();
        for inst in &instances {
            let it = |m: &str, r: &str| report.run(inst, m, r).and_then(|x| x.iterations);
            let (dg_last, dfg_last, dfg_avg) =
                (it("dg", "last"), it("dfg", "last"), it("dfg", "avg"));
            if let (Some(a), Some(b)) = (dfg_last, dg_last) {
                fast_first += usize::from(a < b);
            } else if dfg_last.is_some() {
                fast_first += 1;
            }
            match (dfg_last, dfg_avg) {
                (Some(a), Some(b)) if a <= b => last_first += 1,
                (Some(_), None) => last_first += 1,
                _ => {}
            }
        }
        let cell = |m: &str, r: &str| {
            report
                .table
                .iter()
                .find(|t| t.method == m && t.recovery == r)
                .map(|t| match t.mean_iterations {
                    Some(v) => format!("{v:.0} ({}/{})", t.converged, t.runs),
                    None => format!("- (0/{})", t.runs),
                })
                .unwrap_or_default()
        };
        lines.push(format!(
            "{family}: DFG-last < DG-last on {fast_first}/10, DFG-last <= DFG-avg on {last_first}/10 [dg last {}, dg avg {}, dfg last {}, dfg avg {}]",
            cell("dg", "last"),
            cell("dg", "avg"),
            cell("dfg", "last"),
            cell("dfg", "avg")
        ));
        if instances.len() != 10 || fast_first < 8 || last_first < 8 {
            return Err(lines.join("; "));
        }
    }
    Ok(lines.join("; "))
}

/// Plain projected gradient on the inner problem, run to a 1e-12 step.
fn brute_force(problem: &ConicProblem, x: &[f64]) -> (f64, Vec<f64>) {
    let obj = problem.objective();
    let gtx = problem.constraint_matrix().mul_t_vec(x);
    let l = obj.gradient_lipschitz() * 1.01;
    let mut u = problem.set().project(&vec![0.0; problem.n()]);
    for _ in 0..1_000_000 {
        let grad = obj.gradient(&u).expect("domain");
        let mut next: Vec<f64> = u
            .iter()
            .zip(&grad)
            .zip(&gtx)
            .map(|((ui, gi), ci)| ui - (gi - ci) / l)
            .collect();
        problem.set().project_in_place(&mut next);
        let step = next
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        u = next;
        if step < 1e-12 {
            break;
        }
    }
    let s = problem.constraint_value(&u);
    let d = obj.value(&u).expect("domain") - x.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>();
    (d, s.iter().map(|v| -v).collect())
}

fn c10_oracle() -> Check {
    let specs = [
        (Family::Qp, 3, 2, ConeKind::Zero),
        (Family::Qp, 4, 3, ConeKind::Soc),
        (Family::Num, 4, 3, ConeKind::Nonpos),
        (Family::Res, 3, 4, ConeKind::Nonneg),
        (Family::Res, 4, 2, ConeKind::Nonpos),
    ];
    let (mut dev, mut fd_dev): (f64, f64) = (0.0, 0.0);
    for (i, (family, n, p, cone)) in specs.into_iter().enumerate() {
        let mut s = GeneratorSpec::new(family, n, 900 + i as u64);
        s.p = Some(p);
        s.cone = cone;
        let problem = generate_problem(&s).map_err(|e| format!("{e:#}"))?;
        let oracle = DualOracle::new(
            &problem,
            InnerOptions {
                tol: 1e-12,
                max_iter: 100_000,
            },
        )
        .map_err(|e| e.to_string())?;
        let dual = cone.build(p);
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        for _ in 0..100 {
            let raw: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
            let x = dual.project_dual(&raw);
            let r = oracle.evaluate(&x, None).map_err(|e| e.to_string())?;
            let (d_bf, g_bf) = brute_force(&problem, &x);
            dev = dev.max((r.value - d_bf).abs());
            for (a, b) in r.gradient.iter().zip(&g_bf) {
                dev = dev.max((a - b).abs());
            }
            for j in 0..p {
                let h = 1e-5;
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[j] += h;
                xm[j] -= h;
                let dp = oracle.evaluate(&xp, None).map_err(|e| e.to_string())?.value;
                let dm = oracle.evaluate(&xm, None).map_err(|e| e.to_string())?.value;
                fd_dev = fd_dev.max(((dp - dm) / (2.0 * h) - r.gradient[j]).abs());
            }
        }
    }
    if dev > 1e-6 || fd_dev > 1e-5 {
        return Err(format!(
            "brute-force deviation {dev:.2e}, finite-difference deviation {fd_dev:.2e}"
        ));
    }
    Ok(format!("5 instances x 100 points: brute-force deviation {dev:.2e}, finite differences {fd_dev:.2e}"))
}

fn main() {
    let mut ctx = Ctx::default();
    let criteria: Vec<(&str, &str, Box<dyn Fn(&mut Ctx) -> Check>)> = vec![
        ("C1", "DG dual-gap envelope", Box::new(c1_dg_gap)),
        ("C2", "DFG dual-gap envelope", Box::new(c2_dfg_gap)),
        ("C3", "lemma suite", Box::new(c3_lemmas)),
        ("C4", "theta sequence", Box::new(|_: &mut Ctx| c4_theta())),
        ("C5", "average-recovery envelopes", Box::new(c5_averages)),
        (
            "C6",
            "equality last-iterate improvements",
            Box::new(c6_equality),
        ),
        (
            "C7",
            "regularized DFG infeasibility",
            Box::new(|_: &mut Ctx| c7_regularized()),
        ),
        (
            "C8",
            "linear convergence under error bound",
            Box::new(|_: &mut Ctx| c8_linear()),
        ),
        (
            "C9",
            "iteration-table ordering",
            Box::new(|_: &mut Ctx| c9_tables()),
        ),
        (
            "C10",
            "dual oracle equivalence",
            Box::new(|_: &mut Ctx| c10_oracle()),
        ),
    ];
    let mut failed = 0;
    for (id, name, f) in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| f(&mut ctx))).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {id:<4} {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:<4} {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
