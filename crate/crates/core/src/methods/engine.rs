use alloc::vec;
use alloc::vec::Vec;

use super::average::{theta_next, WeightedAverage};
use super::config::{Method, Restart, SolverConfig, StepRule, StopRule};
use super::observe::{Clock, IterateView, NoClock, NoObserver, Observer};
use super::stopping::stopping_check;
use super::trace::{IterationTrace, Phase, TraceRow};
use super::{
    default_delta, regularized_budget, restart_interval, DualMethodState, EpochSummary, RunOutcome,
    Termination,
};
use crate::error::{check_len, Error, Result};
use crate::inner::{dual_ascent_step, DualOracle, DualOracleResult, DUAL_CONE_TOL};
use crate::math::{dist, norm, sqrt};
use crate::model::ConicProblem;

/// Iterations of the fast pre-run that estimates `R_d` for the default `δ`.
const R_D_PRERUN: usize = 200;

/// Extra per-row inputs beyond `x^k` and the oracle at `x^k`.
struct RowExtras<'b> {
    k: usize,
    epoch: usize,
    phase: Phase,
    alpha: f64,
    step_norm: f64,
    d_reg: f64,
    y: Option<&'b [f64]>,
    d_y: Option<f64>,
    grad_y: Option<&'b [f64]>,
    w: Option<&'b [f64]>,
    theta: f64,
}

impl RowExtras<'_> {
    fn plain(k: usize, phase: Phase, alpha: f64, step_norm: f64) -> Self {
        RowExtras {
            k,
            epoch: 0,
            phase,
            alpha,
            step_norm,
            d_reg: f64::NAN,
            y: None,
            d_y: None,
            grad_y: None,
            w: None,
            theta: 0.0,
        }
    }
}

/// End point of a fast phase.
struct FastEnd {
    x: Vec<f64>,
    x_prev: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
    theta: f64,
    theta_prev: f64,
    at_x: DualOracleResult,
    avg: WeightedAverage,
    k: usize,
    done: bool,
    restarts: usize,
}

/// When the fast loop restarts its momentum.
#[derive(Clone, Copy)]
enum RestartPolicy {
    Never,
    Every(usize),
    Adaptive {
        f_star: f64,
        c2: f64,
        cap: Option<usize>,
    },
}

pub(crate) struct Engine<'a> {
    problem: &'a ConicProblem,
    oracle: DualOracle<'a>,
    config: &'a SolverConfig,
    clock: &'a dyn Clock,
    observer: &'a mut dyn Observer,
    l_d: f64,
    x0: Vec<f64>,
    trace: IterationTrace,
    t0: u64,
    prev_d: Option<f64>,
    stop_last: Option<usize>,
    stop_avg: Option<usize>,
    epochs: Vec<EpochSummary>,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(
        problem: &'a ConicProblem,
        config: &'a SolverConfig,
        clock: &'a dyn Clock,
        observer: &'a mut dyn Observer,
    ) -> Result<Self> {
        let p = problem.p();
        let x0 = match &config.x0 {
            Some(x0) => {
                check_len("x0", p, x0.len())?;
                let off = problem.cone().dual_distance(x0);
                if off > DUAL_CONE_TOL * norm(x0).max(1.0) {
                    return Err(Error::OutsideDualCone { distance: off });
                }
                problem.cone().project_dual(x0)
            }
            None => vec![0.0; p],
        };
        let l_d = problem.lipschitz_dual_constant()?;
        if !(l_d > 0.0) {
            return Err(Error::Config(
                "dual Lipschitz constant is zero (G = 0)".into(),
            ));
        }
        let oracle = DualOracle::new(problem, config.inner)?;
        let mut trace = IterationTrace::new(config.method);
        trace.f_star = config.monitor.as_ref().map(|m| m.f_star);
        let t0 = clock.now_ns();
        Ok(Engine {
            problem,
            oracle,
            config,
            clock,
            observer,
            l_d,
            x0,
            trace,
            t0,
            prev_d: None,
            stop_last: None,
            stop_avg: None,
            epochs: Vec::new(),
        })
    }

    fn l_g(&self) -> Result<f64> {
        let l_d = self.l_d;
        let tol = 1e-12;
        match self.config.step {
            StepRule::InverseLipschitz => Ok(l_d),
            StepRule::Constant(a) => {
                if a * l_d > 1.0 + tol {
                    Err(Error::Config(alloc::format!(
                        "step {a} exceeds 1/L_d = {}",
                        1.0 / l_d
                    )))
                } else {
                    Ok(1.0 / a)
                }
            }
            StepRule::Alternating { l_g } => {
                if l_g < l_d * (1.0 - tol) {
                    Err(Error::Config(alloc::format!(
                        "L_G = {l_g} is below L_d = {l_d}"
                    )))
                } else {
                    Ok(l_g)
                }
            }
        }
    }

    /// Step size taken from the `j`-th iterate of a plain gradient phase.
    fn step_size(&self, j: usize) -> f64 {
        match self.config.step {
            StepRule::InverseLipschitz => 1.0 / self.l_d,
            StepRule::Constant(a) => a,
            StepRule::Alternating { l_g } => {
                if j % 2 == 0 {
                    1.0 / self.l_d
                } else {
                    1.0 / l_g
                }
            }
        }
    }

    /// Records a row and reports whether every requested recovery has stopped.
    fn record(
        &mut self,
        x: &[f64],
        at_x: &DualOracleResult,
        avg: &WeightedAverage,
        ex: RowExtras<'_>,
    ) -> Result<bool> {
        let prob = self.problem;
        let cone = prob.cone();
        let obj = prob.objective();
        let x_plus = dual_ascent_step(cone, x, &at_x.gradient, 1.0 / self.l_d);
        let neg_grad: Vec<f64> = at_x.gradient.iter().map(|v| -v).collect();
        let (infeas_avg, f_avg, dist_ustar_avg) = match avg.get() {
            Some(ua) => {
                let ga = prob.constraint_value(ua);
                let du = self
                    .config
                    .monitor
                    .as_ref()
                    .map_or(f64::NAN, |m| dist(ua, &m.u_star));
                (cone.distance(&ga), obj.value(ua)?, du)
            }
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        let (dist_xstar, dist_ustar_last) = match &self.config.monitor {
            Some(m) if m.x_star.len() == x.len() => (dist(x, &m.x_star), dist(&at_x.u, &m.u_star)),
            Some(m) => (f64::NAN, dist(&at_x.u, &m.u_star)),
            None => (f64::NAN, f64::NAN),
        };
        let row = TraceRow {
            k: ex.k,
            epoch: ex.epoch,
            phase: ex.phase,
            d: at_x.value,
            grad_norm: norm(&at_x.gradient),
            gradmap_norm: dist(&x_plus, x),
            infeas_last: cone.distance(&neg_grad),
            f_last: obj.value(&at_x.u)?,
            infeas_avg,
            f_avg,
            dist_x0: dist(x, &self.x0),
            x_norm: norm(x),
            step_norm: ex.step_norm,
            alpha: ex.alpha,
            d_reg: ex.d_reg,
            dist_xstar,
            dist_ustar_last,
            dist_ustar_avg,
            wall_ns: self.clock.now_ns().saturating_sub(self.t0),
        };
        self.observer.observe(&IterateView {
            row: &row,
            x,
            y: ex.y,
            d_y: ex.d_y,
            grad_y: ex.grad_y,
            w: ex.w,
            theta: ex.theta,
            l_d: self.l_d,
        });
        self.trace.rows.push(row);

        let ds = self.prev_d.map_or(f64::NAN, |d| (row.d - d).abs());
        self.prev_d = Some(row.d);
        let rule = self.config.stop_rule;
        let eps = self.config.epsilon;
        if self.stop_last.is_none() && stopping_check(ds, row.infeas_last, eps).should_stop(rule) {
            self.stop_last = Some(row.k);
        }
        if self.stop_avg.is_none() && stopping_check(ds, row.infeas_avg, eps).should_stop(rule) {
            self.stop_avg = Some(row.k);
        }
        let rec = self.config.recovery;
        Ok(rule != StopRule::Never
            && (!rec.wants_last() || self.stop_last.is_some())
            && (!rec.wants_average() || self.stop_avg.is_some()))
    }

    fn outcome(
        self,
        state: DualMethodState,
        done: bool,
        extra: OutcomeExtras,
    ) -> Result<RunOutcome> {
        let l_g = self.l_g()?;
        Ok(RunOutcome {
            trace: self.trace,
            state,
            termination: if done {
                Termination::Converged
            } else {
                Termination::IterationLimit
            },
            stop_last: self.stop_last,
            stop_avg: self.stop_avg,
            l_d: self.l_d,
            l_g,
            sigma_f: self.problem.objective().sigma_f(),
            delta: extra.delta,
            reg_budget: extra.reg_budget,
            restart_interval: extra.restart_interval,
            r_d_estimate: extra.r_d,
            epochs: self.epochs,
        })
    }

    /// Plain gradient steps starting from an already evaluated `x`, whose
    /// row has been recorded. Runs until `k_last` or the stopping rule.
    #[allow(clippy::too_many_arguments)]
    fn gradient_phase(
        &mut self,
        mut x: Vec<f64>,
        mut at_x: DualOracleResult,
        mut avg: WeightedAverage,
        k_start: usize,
        k_last: usize,
        mut s_alpha: f64,
    ) -> Result<(DualMethodState, bool)> {
        let cone = *self.problem.cone();
        let mut x_prev = x.clone();
        let mut k = k_start;
        let mut done = false;
        while k < k_last {
            let alpha = self.step_size(k - k_start);
            let x_next = dual_ascent_step(&cone, &x, &at_x.gradient, alpha);
            let at_next = self.oracle.evaluate(&x_next, Some(&at_x.u))?;
            k += 1;
            let w_next = self.step_size(k - k_start);
            avg.push(&at_next.u, w_next);
            s_alpha += w_next;
            let step = dist(&x_next, &x);
            done = self.record(
                &x_next,
                &at_next,
                &avg,
                RowExtras::plain(k, Phase::Dg, alpha, step),
            )?;
            x_prev = x;
            x = x_next;
            at_x = at_next;
            if done {
                break;
            }
        }
        let state = DualMethodState {
            k,
            y: x.clone(),
            w: x.clone(),
            x_prev,
            theta: 0.0,
            theta_prev: 0.0,
            s_alpha,
            s_theta: 0.0,
            avg_u: avg.get().map(<[f64]>::to_vec),
            last_u: at_x.u,
            restart_count: 0,
            x,
        };
        Ok((state, done))
    }

    pub(crate) fn run_dg(mut self) -> Result<RunOutcome> {
        self.l_g()?;
        let x = self.x0.clone();
        let at_x = self.oracle.evaluate(&x, None)?;
        let mut avg = WeightedAverage::new(self.problem.n());
        let a0 = self.step_size(0);
        avg.push(&at_x.u, a0);
        let done = self.record(&x, &at_x, &avg, RowExtras::plain(0, Phase::Dg, 0.0, 0.0))?;
        let (state, done) = if done {
            (self.snapshot_plain(x, at_x, &avg, a0), true)
        } else {
            let k_last = self.config.max_iter;
            self.gradient_phase(x, at_x, avg, 0, k_last, a0)?
        };
        self.outcome(state, done, OutcomeExtras::default())
    }

    fn snapshot_plain(
        &self,
        x: Vec<f64>,
        at_x: DualOracleResult,
        avg: &WeightedAverage,
        s_alpha: f64,
    ) -> DualMethodState {
        DualMethodState {
            k: self.trace.last().map_or(0, |r| r.k),
            x_prev: x.clone(),
            y: x.clone(),
            w: x.clone(),
            x,
            theta: 0.0,
            theta_prev: 0.0,
            s_alpha,
            s_theta: 0.0,
            avg_u: avg.get().map(<[f64]>::to_vec),
            last_u: at_x.u,
            restart_count: 0,
        }
    }

    /// Fast gradient iterations from `x⁰`, recording row 0 first.
    fn fast_phase(&mut self, k_last: usize, policy: RestartPolicy) -> Result<FastEnd> {
        let cone = *self.problem.cone();
        let l_d = self.l_d;
        let mut x = self.x0.clone();
        let mut x_prev = x.clone();
        let mut y = x.clone();
        let mut w = x.clone();
        let mut theta = 1.0;
        let mut theta_prev = 0.0;
        let mut at_x = self.oracle.evaluate(&x, None)?;
        let mut avg = WeightedAverage::new(self.problem.n());
        let mut epoch = 0;
        let mut restarts = 0;
        let mut epoch_start = (0usize, at_x.value);
        let mut done = self.record(&x, &at_x, &avg, RowExtras::plain(0, Phase::Dfg, 0.0, 0.0))?;
        let mut at_y = at_x.clone();
        let mut local = 1usize;
        let mut k = 0usize;
        let f_ref = match policy {
            RestartPolicy::Adaptive { f_star, .. } => Some(f_star),
            _ => self.config.monitor.as_ref().map(|m| m.f_star),
        };
        let gap = |d: f64| f_ref.map_or(f64::NAN, |f| f - d);

        while !done && k < k_last {
            let x_new = dual_ascent_step(&cone, &y, &at_y.gradient, 1.0 / l_d);
            avg.push(&at_y.u, theta);
            let w_new: Vec<f64> = x
                .iter()
                .zip(&x_new)
                .map(|(a, b)| a + theta * (b - a))
                .collect();
            let at_new = self.oracle.evaluate(&x_new, Some(&at_y.u))?;
            k += 1;
            let step = dist(&x_new, &x);
            done = self.record(
                &x_new,
                &at_new,
                &avg,
                RowExtras {
                    k,
                    epoch,
                    phase: Phase::Dfg,
                    alpha: 1.0 / l_d,
                    step_norm: step,
                    d_reg: f64::NAN,
                    y: Some(&y),
                    d_y: Some(at_y.value),
                    grad_y: Some(&at_y.gradient),
                    w: Some(&w_new),
                    theta,
                },
            )?;
            x_prev = core::mem::replace(&mut x, x_new);
            w = w_new;
            at_x = at_new;
            if done || k >= k_last {
                break;
            }
            let restart = match policy {
                RestartPolicy::Never => false,
                RestartPolicy::Every(kc) => local >= kc,
                RestartPolicy::Adaptive { f_star, c2, cap } => {
                    // A non-positive starting gap means f* was reached up to rounding.
                    let g0 = f_star - epoch_start.1;
                    (g0 > 0.0 && f_star - at_x.value <= c2 * g0) || cap.is_some_and(|c| local >= c)
                }
            };
            if restart {
                self.epochs.push(EpochSummary {
                    epoch,
                    start_k: epoch_start.0,
                    end_k: k,
                    gap_start: gap(epoch_start.1),
                    gap_end: gap(at_x.value),
                    restarted: true,
                });
                epoch += 1;
                restarts += 1;
                epoch_start = (k, at_x.value);
                local = 1;
                theta = 1.0;
                theta_prev = 0.0;
                x_prev = x.clone();
                y = x.clone();
                at_y = at_x.clone();
                avg.reset();
                continue;
            }
            let theta_new = theta_next(theta);
            let beta = (theta - 1.0) / theta_new;
            theta_prev = theta;
            theta = theta_new;
            local += 1;
            if beta == 0.0 {
                y = x.clone();
                at_y = at_x.clone();
            } else {
                y = x
                    .iter()
                    .zip(&x_prev)
                    .map(|(a, b)| a + beta * (a - b))
                    .collect();
                at_y = self.oracle.evaluate(&y, Some(&at_x.u))?;
            }
        }
        if matches!(
            policy,
            RestartPolicy::Every(_) | RestartPolicy::Adaptive { .. }
        ) {
            self.epochs.push(EpochSummary {
                epoch,
                start_k: epoch_start.0,
                end_k: k,
                gap_start: gap(epoch_start.1),
                gap_end: gap(at_x.value),
                restarted: false,
            });
        }
        Ok(FastEnd {
            x,
            x_prev,
            y,
            w,
            theta,
            theta_prev,
            at_x,
            avg,
            k,
            done,
            restarts,
        })
    }

    fn fast_state(end: FastEnd) -> (DualMethodState, bool) {
        let state = DualMethodState {
            k: end.k,
            x: end.x,
            x_prev: end.x_prev,
            y: end.y,
            theta: end.theta,
            theta_prev: end.theta_prev,
            w: end.w,
            s_alpha: 0.0,
            s_theta: end.avg.total_weight(),
            avg_u: end.avg.get().map(<[f64]>::to_vec),
            last_u: end.at_x.u,
            restart_count: end.restarts,
        };
        (state, end.done)
    }

    pub(crate) fn run_dfg(mut self) -> Result<RunOutcome> {
        let end = self.fast_phase(self.config.max_iter, RestartPolicy::Never)?;
        let (state, done) = Self::fast_state(end);
        self.outcome(state, done, OutcomeExtras::default())
    }

    pub(crate) fn run_rdfg(mut self) -> Result<RunOutcome> {
        let c = self.config.contraction;
        let (policy, interval) = match self.config.restart {
            Some(Restart::Interval(kc)) => (RestartPolicy::Every(kc), Some(kc)),
            Some(Restart::Kappa(kappa)) => {
                let kc = restart_interval(kappa, c);
                (RestartPolicy::Every(kc), Some(kc))
            }
            Some(Restart::Adaptive { f_star, kappa }) => {
                let cap = kappa.map(|kp| restart_interval(kp, c));
                (
                    RestartPolicy::Adaptive {
                        f_star,
                        c2: c * c,
                        cap,
                    },
                    cap,
                )
            }
            None => return Err(Error::Config("missing restart schedule".into())),
        };
        let end = self.fast_phase(self.config.max_iter, policy)?;
        let (state, done) = Self::fast_state(end);
        self.outcome(
            state,
            done,
            OutcomeExtras {
                restart_interval: interval,
                ..OutcomeExtras::default()
            },
        )
    }

    pub(crate) fn run_hybrid(mut self) -> Result<RunOutcome> {
        let split = self.config.hybrid_split.unwrap_or(0);
        let total = split.saturating_mul(2).min(self.config.max_iter);
        let end = self.fast_phase(split.min(total), RestartPolicy::Never)?;
        if end.done || end.k >= total {
            let (state, done) = Self::fast_state(end);
            return self.outcome(state, done, OutcomeExtras::default());
        }
        let mut avg = WeightedAverage::new(self.problem.n());
        let a0 = self.step_size(0);
        avg.push(&end.at_x.u, a0);
        let (state, done) = self.gradient_phase(end.x, end.at_x, avg, end.k, total, a0)?;
        self.outcome(state, done, OutcomeExtras::default())
    }

    pub(crate) fn run_regdfg(mut self) -> Result<RunOutcome> {
        let (delta, r_d) = match self.config.delta {
            Some(d) => (d, self.config.r_d),
            None => {
                let r = match self.config.r_d {
                    Some(r) => r,
                    None => self.estimate_r_d()?,
                };
                (default_delta(self.config.epsilon, r), Some(r))
            }
        };
        let budget = r_d.map(|r| regularized_budget(self.l_d, delta, r, self.config.epsilon));

        let cone = *self.problem.cone();
        let l_reg = self.l_d + delta;
        let beta = (sqrt(l_reg) - sqrt(delta)) / (sqrt(l_reg) + sqrt(delta));
        let x0 = self.x0.clone();
        let d_reg = |d: f64, x: &[f64]| {
            let r = dist(x, &x0);
            d - 0.5 * delta * r * r
        };

        let mut x = x0.clone();
        let mut x_prev = x.clone();
        let mut y = x.clone();
        let mut at_x = self.oracle.evaluate(&x, None)?;
        let mut avg = WeightedAverage::new(self.problem.n());
        let mut ex0 = RowExtras::plain(0, Phase::RegDfg, 0.0, 0.0);
        ex0.d_reg = at_x.value;
        let mut done = self.record(&x, &at_x, &avg, ex0)?;
        let mut at_y = at_x.clone();
        let mut k = 0;
        while !done && k < self.config.max_iter {
            let grad_reg: Vec<f64> = at_y
                .gradient
                .iter()
                .zip(&y)
                .zip(&x0)
                .map(|((g, yi), x0i)| g - delta * (yi - x0i))
                .collect();
            let x_new = dual_ascent_step(&cone, &y, &grad_reg, 1.0 / l_reg);
            avg.push(&at_y.u, 1.0);
            let at_new = self.oracle.evaluate(&x_new, Some(&at_y.u))?;
            k += 1;
            let mut ex = RowExtras::plain(k, Phase::RegDfg, 1.0 / l_reg, dist(&x_new, &x));
            ex.d_reg = d_reg(at_new.value, &x_new);
            ex.y = Some(&y);
            ex.d_y = Some(at_y.value);
            ex.grad_y = Some(&at_y.gradient);
            done = self.record(&x_new, &at_new, &avg, ex)?;
            x_prev = core::mem::replace(&mut x, x_new);
            at_x = at_new;
            if done || k >= self.config.max_iter {
                break;
            }
            y = x
                .iter()
                .zip(&x_prev)
                .map(|(a, b)| a + beta * (a - b))
                .collect();
            at_y = self.oracle.evaluate(&y, Some(&at_x.u))?;
        }
        let state = DualMethodState {
            k,
            w: x.clone(),
            x,
            x_prev,
            y,
            theta: beta,
            theta_prev: beta,
            s_alpha: 0.0,
            s_theta: avg.total_weight(),
            avg_u: avg.get().map(<[f64]>::to_vec),
            last_u: at_x.u,
            restart_count: 0,
        };
        self.outcome(
            state,
            done,
            OutcomeExtras {
                delta: Some(delta),
                reg_budget: budget,
                r_d,
                ..OutcomeExtras::default()
            },
        )
    }

    /// `‖x⁰ − x̂‖` where `x̂` ends a short fast gradient pre-run.
    fn estimate_r_d(&self) -> Result<f64> {
        let cfg = SolverConfig {
            method: Method::Dfg,
            max_iter: R_D_PRERUN,
            stop_rule: StopRule::Never,
            monitor: None,
            x0: Some(self.x0.clone()),
            ..self.config.clone()
        };
        let mut obs = NoObserver;
        let pre = Engine::new(self.problem, &cfg, &NoClock, &mut obs)?;
        let out = pre.run_dfg()?;
        Ok(dist(&out.state.x, &self.x0).max(1e-12))
    }
}

#[derive(Default)]
struct OutcomeExtras {
    delta: Option<f64>,
    reg_budget: Option<usize>,
    restart_interval: Option<usize>,
    r_d: Option<f64>,
}
