use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::inner::InnerOptions;

/// Dual first-order method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Projected dual gradient ascent.
    Dg,
    /// Dual fast gradient with the `θ` momentum sequence.
    Dfg,
    /// Fast gradient restarted every `K_c` iterations or adaptively.
    Rdfg,
    /// Fast gradient on the dual regularized by `−(δ/2)‖x − x⁰‖²`.
    RegDfg,
    /// `k` fast gradient steps followed by `k` plain gradient steps.
    Hybrid,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Dg,
        Method::Dfg,
        Method::Rdfg,
        Method::RegDfg,
        Method::Hybrid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Dg => "dg",
            Method::Dfg => "dfg",
            Method::Rdfg => "rdfg",
            Method::RegDfg => "regdfg",
            Method::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "dg" => Ok(Method::Dg),
            "dfg" => Ok(Method::Dfg),
            "rdfg" => Ok(Method::Rdfg),
            "regdfg" | "regularizeddfg" => Ok(Method::RegDfg),
            "hybrid" => Ok(Method::Hybrid),
            _ => Err(Error::Config(alloc::format!("unknown method '{s}'"))),
        }
    }
}

/// Which primal recovery the stopping rule waits for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recovery {
    /// `u(x^k)`
    Last,
    /// Weighted average of the inner minimizers.
    Average,
    Both,
}

impl Recovery {
    pub fn wants_last(&self) -> bool {
        matches!(self, Recovery::Last | Recovery::Both)
    }

    pub fn wants_average(&self) -> bool {
        matches!(self, Recovery::Average | Recovery::Both)
    }
}

impl FromStr for Recovery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last" => Ok(Recovery::Last),
            "avg" | "average" => Ok(Recovery::Average),
            "both" => Ok(Recovery::Both),
            _ => Err(Error::Config(alloc::format!("unknown recovery '{s}'"))),
        }
    }
}

/// How the two stopping tests combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// Dual progress and primal feasibility must both hold.
    #[default]
    Both,
    /// Either test suffices.
    Either,
    /// Run until the iteration limit.
    Never,
}

impl FromStr for StopRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(StopRule::Both),
            "either" => Ok(StopRule::Either),
            "never" => Ok(StopRule::Never),
            _ => Err(Error::Config(alloc::format!("unknown stop rule '{s}'"))),
        }
    }
}

/// Dual step sizes for the plain gradient method.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum StepRule {
    /// `α = 1/L_d`
    #[default]
    InverseLipschitz,
    /// Constant `α ∈ (0, 1/L_d]`; the envelopes then use `L_G = 1/α`.
    Constant(f64),
    /// Alternates `1/L_d` and `1/L_G` for a user constant `L_G ≥ L_d`.
    Alternating { l_g: f64 },
}

/// Restart schedule for the restarted fast method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Restart {
    /// Fixed epoch length.
    Interval(usize),
    /// Epoch length `⌊2κ/c⌋` from a condition-number estimate.
    Kappa(f64),
    /// Restart when `f* − d(x) ≤ c² (f* − d(x_epoch_start))`.
    /// An optional `κ` caps the epoch length.
    Adaptive { f_star: f64, kappa: Option<f64> },
}

/// Solver settings. `Default` gives DG with `ε = 1e-2`, 15000 iterations,
/// `x⁰ = 0` and both recoveries.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub epsilon: f64,
    pub max_iter: usize,
    pub inner: InnerOptions,
    pub step: StepRule,
    /// Starting multiplier; zero when `None`.
    pub x0: Option<Vec<f64>>,
    pub recovery: Recovery,
    pub stop_rule: StopRule,
    /// Restart schedule, required by [`Method::Rdfg`].
    pub restart: Option<Restart>,
    /// Per-epoch contraction target `c ∈ (0, 1)`.
    pub contraction: f64,
    /// Regularization weight; defaults to `ε / R̂_d²`.
    pub delta: Option<f64>,
    /// Known or estimated `‖x⁰ − x*‖`, used by the regularized method.
    pub r_d: Option<f64>,
    /// Number of fast gradient steps before the hybrid switches to plain steps.
    pub hybrid_split: Option<usize>,
    /// Reference optimum for distance columns in the trace.
    pub monitor: Option<MonitorReference>,
}

/// Known optimum used to fill the distance columns of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReference {
    pub x_star: Vec<f64>,
    pub u_star: Vec<f64>,
    pub f_star: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Dg,
            epsilon: 1e-2,
            max_iter: 15_000,
            inner: InnerOptions::default(),
            step: StepRule::default(),
            x0: None,
            recovery: Recovery::Both,
            stop_rule: StopRule::Both,
            restart: None,
            contraction: core::f64::consts::E.recip(),
            delta: None,
            r_d: None,
            hybrid_split: None,
            monitor: None,
        }
    }
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        SolverConfig {
            method,
            ..SolverConfig::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(String::from(msg)));
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.inner.tol > 0.0) {
            return bad("inner tolerance must be positive");
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad("contraction must lie in (0, 1)");
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return bad("delta must be positive");
            }
        }
        if let Some(r) = self.r_d {
            if !(r >= 0.0) {
                return bad("r_d must be nonnegative");
            }
        }
        match self.step {
            StepRule::InverseLipschitz => {}
            StepRule::Constant(a) if a > 0.0 => {}
            StepRule::Alternating { l_g } if l_g > 0.0 => {}
            _ => return bad("step sizes must be positive"),
        }
        match self.restart {
            Some(Restart::Interval(0)) => return bad("restart interval must be positive"),
            Some(Restart::Kappa(k)) if !(k > 0.0) => return bad("kappa must be positive"),
            Some(Restart::Adaptive { kappa: Some(k), .. }) if !(k > 0.0) => {
                return bad("kappa must be positive")
            }
            _ => {}
        }
        if self.method == Method::Rdfg && self.restart.is_none() {
            return bad("the restarted method needs a restart interval, kappa, or an adaptive restart with f*");
        }
        if self.method == Method::Hybrid && self.hybrid_split.is_none() {
            return bad("the hybrid method needs a split index k");
        }
        Ok(())
    }
}
