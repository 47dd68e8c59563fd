mod common;

use common::{random_qp, toy_equality};
use conic_dual_core::certify::{
    check_envelope, reference_solution, BoundConstants, BoundFamily, LemmaMonitor, Slack,
};
use conic_dual_core::methods::{
    self, theta_next, Method, MonitorReference, NoClock, Phase, Recovery, Restart, SolverConfig,
    StepRule, StopRule, Termination,
};
use conic_dual_core::{Cone, Error, SimpleSet};

fn cfg(method: Method) -> SolverConfig {
    SolverConfig::new(method)
}

#[test]
fn dg_single_step_on_toy() {
    let p = toy_equality();
    let mut c = cfg(Method::Dg);
    c.max_iter = 1;
    let out = methods::run(&p, &c).unwrap();
    assert_eq!(out.trace.rows.len(), 2);
    assert!((out.state.x[0] - 0.5).abs() < 1e-15);
    assert!((out.l_d - 2.0).abs() < 1e-12);
}

#[test]
fn dg_converges_quickly_on_toy() {
    let p = toy_equality();
    let mut c = cfg(Method::Dg);
    c.epsilon = 1e-6;
    c.recovery = Recovery::Last;
    let out = methods::run(&p, &c).unwrap();
    assert_eq!(out.termination, Termination::Converged);
    let last = out.trace.last().unwrap();
    assert!(last.k <= 5);
    let prev = &out.trace.rows[out.trace.rows.len() - 2];
    assert!((last.d - prev.d).abs() <= 1e-12);
    assert!(last.infeas_last <= 1e-6);
}

#[test]
fn dfg_first_step_on_toy() {
    let p = toy_equality();
    let mut c = cfg(Method::Dfg);
    c.max_iter = 1;
    let out = methods::run(&p, &c).unwrap();
    let r1 = &out.trace.rows[1];
    assert_eq!(r1.k, 1);
    assert!((out.state.x[0] - 0.5).abs() < 1e-15);
    // u¹ = u(y¹) = u(x⁰) = 0, so the θ-average after one step is zero.
    assert_eq!(out.state.avg_u.as_deref(), Some(&[0.0, 0.0][..]));
    assert!((theta_next(1.0) - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);

    c.max_iter = 2;
    let out = methods::run(&p, &c).unwrap();
    // y² = x¹ because θ₁ − 1 = 0.
    assert!((out.state.x_prev[0] - 0.5).abs() < 1e-15);
}

#[test]
fn dfg_average_undefined_at_start() {
    let p = toy_equality();
    let mut c = cfg(Method::Dfg);
    c.max_iter = 3;
    let out = methods::run(&p, &c).unwrap();
    assert!(out.trace.rows[0].infeas_avg.is_nan());
    assert!(out.trace.rows[1].infeas_avg.is_finite());
}

#[test]
fn zero_iterations_records_only_start() {
    let p = toy_equality();
    for m in [Method::Dg, Method::Dfg] {
        let mut c = cfg(m);
        c.max_iter = 0;
        let out = methods::run(&p, &c).unwrap();
        assert_eq!(out.trace.rows.len(), 1);
        assert_eq!(out.trace.rows[0].k, 0);
        assert_eq!(out.termination, Termination::IterationLimit);
    }
}

#[test]
fn rejects_start_outside_dual_cone() {
    let p = random_qp(3, 4, 3, Cone::Nonneg(3), SimpleSet::Whole(4));
    let mut c = cfg(Method::Dg);
    c.x0 = Some(vec![-1.0, 0.0, 0.0]);
    assert!(matches!(
        methods::run(&p, &c),
        Err(Error::OutsideDualCone { .. })
    ));
    c.x0 = Some(vec![0.0; 2]);
    assert!(matches!(methods::run(&p, &c), Err(Error::Dimension { .. })));
}

#[test]
fn config_errors() {
    let p = toy_equality();
    assert!(matches!(
        methods::run(&p, &cfg(Method::Rdfg)),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        methods::run(&p, &cfg(Method::Hybrid)),
        Err(Error::Config(_))
    ));
    let mut c = cfg(Method::Dg);
    c.step = StepRule::Constant(1.0);
    assert!(matches!(methods::run(&p, &c), Err(Error::Config(_))));
    assert!(matches!(
        methods::run_dfg(&p, &cfg(Method::Dg)),
        Err(Error::Config(_))
    ));
}

#[test]
fn fast_gap_bound_and_theta_average_on_toy() {
    let p = toy_equality();
    let mut c = cfg(Method::Dfg);
    c.stop_rule = StopRule::Never;
    c.max_iter = 10;
    let mut out = methods::run(&p, &c).unwrap();
    out.trace.f_star = Some(0.25);
    let consts = BoundConstants::new(out.l_d, 0.5, 0.0, 1.0);
    for fam in [
        BoundFamily::DfgDualGap,
        BoundFamily::DfgLastInfeas,
        BoundFamily::DfgAvgInfeas,
    ] {
        let env = check_envelope(&out.trace, fam, &consts, Slack::default()).unwrap();
        assert!(env.holds(), "{fam}: {:?}", env.violated_at);
    }
    assert!((out.state.s_theta - out.state.theta * out.state.theta).abs() < 1e-12);
}

#[test]
fn envelope_rejects_mismatched_method() {
    let p = toy_equality();
    let mut c = cfg(Method::Dg);
    c.max_iter = 3;
    let mut out = methods::run(&p, &c).unwrap();
    out.trace.f_star = Some(0.25);
    let consts = BoundConstants::new(2.0, 0.5, 0.0, 1.0);
    assert!(check_envelope(
        &out.trace,
        BoundFamily::DfgDualGap,
        &consts,
        Slack::default()
    )
    .is_err());
    assert!(check_envelope(
        &out.trace,
        BoundFamily::RdfgBudget,
        &consts,
        Slack::default()
    )
    .is_err());
    out.trace.f_star = None;
    assert!(check_envelope(
        &out.trace,
        BoundFamily::DgDualGap,
        &consts,
        Slack::default()
    )
    .is_err());
}

#[test]
fn lemma_monitor_finds_no_violations() {
    for (seed, cone) in [
        (1, Cone::Nonneg(6)),
        (2, Cone::Zero(6)),
        (3, Cone::SecondOrder(6)),
    ] {
        let p = random_qp(seed, 8, 6, cone, SimpleSet::Whole(8));
        let r = reference_solution(&p, &[0.0; 6]).unwrap();
        for m in [Method::Dg, Method::Dfg] {
            let mut c = cfg(m);
            c.max_iter = 300;
            c.stop_rule = StopRule::Never;
            let mut mon = LemmaMonitor::from_reference(&r, 1e-8);
            methods::run_with(&p, &c, &NoClock, &mut mon).unwrap();
            assert!(mon.checks() > 300);
            assert!(
                mon.violations().is_empty(),
                "{m} {cone:?}: {:?}",
                &mon.violations()[..1]
            );
        }
    }
}

#[test]
fn alternating_steps_respect_gap_bound_with_l_g() {
    let p = random_qp(9, 6, 4, Cone::Nonpos(4), SimpleSet::Whole(6));
    let r = reference_solution(&p, &[0.0; 4]).unwrap();
    let l_d = p.lipschitz_dual_constant().unwrap();
    let mut c = cfg(Method::Dg);
    c.step = StepRule::Alternating { l_g: 3.0 * l_d };
    c.max_iter = 200;
    c.stop_rule = StopRule::Never;
    let mut out = methods::run(&p, &c).unwrap();
    assert!((out.l_g - 3.0 * l_d).abs() < 1e-9 * l_d);
    out.trace.f_star = Some(r.f_star);
    let mut consts = BoundConstants::new(out.l_d, r.r_d, 0.0, out.sigma_f);
    consts.l_g = out.l_g;
    for fam in [
        BoundFamily::DgDualGap,
        BoundFamily::DgAvgInfeas,
        BoundFamily::DgLastInfeas,
    ] {
        assert!(check_envelope(&out.trace, fam, &consts, Slack::default())
            .unwrap()
            .holds());
    }
}

#[test]
fn hybrid_switches_phase_at_split() {
    let p = random_qp(4, 6, 3, Cone::Zero(3), SimpleSet::Whole(6));
    let mut c = cfg(Method::Hybrid);
    c.hybrid_split = Some(5);
    c.stop_rule = StopRule::Never;
    let out = methods::run(&p, &c).unwrap();
    assert_eq!(out.trace.rows.len(), 11);
    assert!(out.trace.rows[..=5].iter().all(|r| r.phase == Phase::Dfg));
    assert!(out.trace.rows[6..].iter().all(|r| r.phase == Phase::Dg));

    let toy = toy_equality();
    c.hybrid_split = Some(1);
    let out = methods::run(&toy, &c).unwrap();
    assert_eq!(out.trace.last().unwrap().k, 2);
}

#[test]
fn restarted_method_epochs() {
    let p = random_qp(5, 8, 6, Cone::Nonneg(6), SimpleSet::Whole(8));
    let mut c = cfg(Method::Rdfg);
    c.restart = Some(Restart::Kappa(10.0));
    c.max_iter = 200;
    c.stop_rule = StopRule::Never;
    let out = methods::run(&p, &c).unwrap();
    assert_eq!(out.restart_interval, Some(54));
    assert_eq!(out.state.restart_count, 3);
    assert_eq!(out.epochs.len(), 4);
    assert_eq!(out.epochs[1].start_k, 54);

    let r = reference_solution(&p, &[0.0; 6]).unwrap();
    c.restart = Some(Restart::Adaptive {
        f_star: r.f_star,
        kappa: None,
    });
    let out = methods::run(&p, &c).unwrap();
    let c2 = c.contraction * c.contraction;
    for e in out.epochs.iter().filter(|e| e.restarted) {
        assert!(e.gap_end <= c2 * e.gap_start + 1e-14);
    }
}

#[test]
fn regularized_method_reports_delta_and_budget() {
    let p = toy_equality();
    let mut c = cfg(Method::RegDfg);
    c.r_d = Some(0.5);
    c.max_iter = 50;
    c.stop_rule = StopRule::Never;
    let out = methods::run(&p, &c).unwrap();
    assert!((out.delta.unwrap() - 0.04).abs() < 1e-15);
    assert!(out.reg_budget.unwrap() > 0);
    // d_δ(x) = x − (1 + δ/2)x², maximized at 1/(2 + δ).
    let xd = 1.0 / (2.0 + 0.04);
    assert!((out.state.x[0] - xd).abs() < 1e-8);
    let last = out.trace.last().unwrap();
    assert!((last.d_reg - 1.0 / (4.0 + 0.08)).abs() < 1e-10);
}

#[test]
fn monitor_fills_distance_columns() {
    let p = toy_equality();
    let mut c = cfg(Method::Dg);
    c.max_iter = 2;
    c.stop_rule = StopRule::Never;
    c.monitor = Some(MonitorReference {
        x_star: vec![0.5],
        u_star: vec![0.5, 0.5],
        f_star: 0.25,
    });
    let out = methods::run(&p, &c).unwrap();
    assert_eq!(out.trace.f_star, Some(0.25));
    assert!((out.trace.rows[0].dist_xstar - 0.5).abs() < 1e-15);
    assert!(out.trace.rows[2].dist_ustar_last < 1e-14);
}

#[test]
fn stop_iterations_recorded_per_recovery() {
    let p = random_qp(7, 10, 5, Cone::Nonpos(5), SimpleSet::Whole(10));
    let mut c = cfg(Method::Dfg);
    c.epsilon = 1e-3;
    let out = methods::run(&p, &c).unwrap();
    assert!(out.converged());
    let last = out.stop_last.unwrap();
    let avg = out.stop_avg.unwrap();
    assert_eq!(out.trace.last().unwrap().k, last.max(avg));
}

#[test]
fn box_and_quadlog_problems_run() {
    let set = SimpleSet::boxed(vec![-1.0; 5], vec![1.0; 5]).unwrap();
    let p = random_qp(8, 5, 3, Cone::Nonneg(3), set);
    let mut c = cfg(Method::Dfg);
    c.epsilon = 1e-4;
    let out = methods::run(&p, &c).unwrap();
    assert!(out.converged());
    let r = reference_solution(&p, &[0.0; 3]).unwrap();
    assert!(r.kkt.max() < 1e-8, "{:?}", r.kkt);
}
