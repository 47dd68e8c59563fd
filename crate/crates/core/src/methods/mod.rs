//! Dual gradient methods, primal recovery and stopping.
//!
//! Every method records one [`TraceRow`] per dual iterate `x^k`, starting
//! with `k = 0`. Row `k` carries `d(x^k)`, the gradient map at `x^k`, the
//! last-iterate recovery `u(x^k)` and the running weighted average of the
//! inner minimizers. Plain gradient steps weight `u(x^j)` by `α_j`; fast
//! steps weight `u(y^j)` by `θ_j`.

mod average;
mod config;
mod engine;
mod observe;
mod stopping;
mod trace;

use alloc::vec::Vec;

pub use average::{theta_next, update_weighted_average, WeightedAverage};
pub use config::{Method, MonitorReference, Recovery, Restart, SolverConfig, StepRule, StopRule};
pub use observe::{Clock, IterateView, NoClock, NoObserver, Observer};
pub use stopping::{stopping_check, StopStatus};
pub use trace::{IterationTrace, Phase, TraceRow};

use crate::error::{Error, Result};
use crate::model::ConicProblem;

/// Snapshot of the iterates when a run ends.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMethodState {
    pub k: usize,
    pub x: Vec<f64>,
    pub x_prev: Vec<f64>,
    /// Last extrapolated point (equals `x` for plain gradient runs).
    pub y: Vec<f64>,
    pub theta: f64,
    pub theta_prev: f64,
    /// Last `w^k` of the fast phase (equals `x` for plain gradient runs).
    pub w: Vec<f64>,
    /// `Σ α_j` over the plain gradient phase.
    pub s_alpha: f64,
    /// `Σ θ_j` over the current fast epoch.
    pub s_theta: f64,
    pub avg_u: Option<Vec<f64>>,
    pub last_u: Vec<f64>,
    pub restart_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The stopping rule held for every requested recovery.
    Converged,
    /// The iteration limit (or the hybrid length `2k`) was reached first.
    IterationLimit,
}

/// One restart epoch of the restarted fast method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochSummary {
    pub epoch: usize,
    pub start_k: usize,
    pub end_k: usize,
    /// `f* − d` at the first and last iterate of the epoch (NaN without `f*`).
    pub gap_start: f64,
    pub gap_end: f64,
    /// Whether the epoch ended with a restart (rather than termination).
    pub restarted: bool,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trace: IterationTrace,
    pub state: DualMethodState,
    pub termination: Termination,
    /// First iteration at which the last-iterate recovery passed the stopping rule.
    pub stop_last: Option<usize>,
    /// Same for the averaged recovery.
    pub stop_avg: Option<usize>,
    pub l_d: f64,
    /// Constant matching the smallest step size used (`L_d` for `α = 1/L_d`).
    pub l_g: f64,
    pub sigma_f: f64,
    pub delta: Option<f64>,
    /// Iteration budget `2√((L_d+δ)/δ) log(R_d √(2(L_d+2δ)) / ε)` of the regularized method.
    pub reg_budget: Option<usize>,
    /// Epoch length of the restarted method, when fixed.
    pub restart_interval: Option<usize>,
    /// `R_d` used to pick `δ` (given or estimated).
    pub r_d_estimate: Option<f64>,
    pub epochs: Vec<EpochSummary>,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Runs `config.method` without timing or observers.
pub fn run(problem: &ConicProblem, config: &SolverConfig) -> Result<RunOutcome> {
    run_with(problem, config, &NoClock, &mut NoObserver)
}

/// Runs `config.method`, timing rows with `clock` and reporting every
/// iterate to `observer`.
pub fn run_with(
    problem: &ConicProblem,
    config: &SolverConfig,
    clock: &dyn Clock,
    observer: &mut dyn Observer,
) -> Result<RunOutcome> {
    config.validate()?;
    let engine = engine::Engine::new(problem, config, clock, observer)?;
    match config.method {
        Method::Dg => engine.run_dg(),
        Method::Dfg => engine.run_dfg(),
        Method::Rdfg => engine.run_rdfg(),
        Method::RegDfg => engine.run_regdfg(),
        Method::Hybrid => engine.run_hybrid(),
    }
}

fn run_method(problem: &ConicProblem, config: &SolverConfig, method: Method) -> Result<RunOutcome> {
    if config.method != method {
        return Err(Error::Config(alloc::format!(
            "configuration is for {}, not {}",
            config.method,
            method
        )));
    }
    run(problem, config)
}

pub fn run_dg(problem: &ConicProblem, config: &SolverConfig) -> Result<RunOutcome> {
    run_method(problem, config, Method::Dg)
}

pub fn run_dfg(problem: &ConicProblem, config: &SolverConfig) -> Result<RunOutcome> {
    run_method(problem, config, Method::Dfg)
}

pub fn run_rdfg(problem: &ConicProblem, config: &SolverConfig) -> Result<RunOutcome> {
    run_method(problem, config, Method::Rdfg)
}

pub fn run_regdfg(problem: &ConicProblem, config: &SolverConfig) -> Result<RunOutcome> {
    run_method(problem, config, Method::RegDfg)
}

pub fn run_hybrid(problem: &ConicProblem, config: &SolverConfig) -> Result<RunOutcome> {
    run_method(problem, config, Method::Hybrid)
}

/// Epoch length `⌊2κ/c⌋` (at least one).
pub fn restart_interval(kappa: f64, contraction: f64) -> usize {
    let k = crate::math::floor(2.0 * kappa / contraction);
    if k < 1.0 {
        1
    } else {
        k as usize
    }
}

/// Default regularization `δ = ε / R_d²`.
pub fn default_delta(epsilon: f64, r_d: f64) -> f64 {
    epsilon / (r_d * r_d).max(f64::MIN_POSITIVE)
}

/// Iteration budget of the regularized fast method.
pub fn regularized_budget(l_d: f64, delta: f64, r_d: f64, epsilon: f64) -> usize {
    use crate::math::{ceil, ln, sqrt};
    let arg = r_d * sqrt(2.0 * (l_d + 2.0 * delta)) / epsilon;
    if !(arg > 1.0) {
        return 0;
    }
    let k = 2.0 * sqrt((l_d + delta) / delta) * ln(arg);
    ceil(k) as usize
}

/// Iteration budget `e κ log(L_d R_d² / ε)` of the restarted fast method.
pub fn restarted_budget(kappa: f64, l_d: f64, r_d: f64, epsilon: f64) -> usize {
    use crate::math::{ceil, ln};
    let arg = l_d * r_d * r_d / epsilon;
    if !(arg > 1.0) {
        return 0;
    }
    ceil(core::f64::consts::E * kappa * ln(arg)) as usize
}
