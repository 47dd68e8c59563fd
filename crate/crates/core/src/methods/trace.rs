use alloc::vec::Vec;

use super::config::Method;

/// Which update produced a trace row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Dg,
    Dfg,
    RegDfg,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Dg => "dg",
            Phase::Dfg => "dfg",
            Phase::RegDfg => "regdfg",
        }
    }
}

/// Measurements at one dual iterate `x^k`.
///
/// Average columns are NaN while the average is undefined, and the distance
/// columns are NaN unless a monitor reference was configured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// Restart epoch (zero for methods without restarts).
    pub epoch: usize,
    pub phase: Phase,
    /// `d(x^k)`
    pub d: f64,
    /// `‖∇d(x^k)‖`
    pub grad_norm: f64,
    /// `‖Π_{K*}(x^k + ∇d(x^k)/L_d) − x^k‖`
    pub gradmap_norm: f64,
    /// `dist_K(G u_last + g)`
    pub infeas_last: f64,
    /// `f(u_last)`
    pub f_last: f64,
    pub infeas_avg: f64,
    pub f_avg: f64,
    /// `‖x^k − x⁰‖`
    pub dist_x0: f64,
    /// `‖x^k‖`
    pub x_norm: f64,
    /// `‖x^k − x^{k−1}‖` (zero on the first row).
    pub step_norm: f64,
    /// Step size used to reach `x^k` from `x^{k−1}`.
    pub alpha: f64,
    /// Regularized dual value `d(x^k) − (δ/2)‖x^k − x⁰‖²`.
    pub d_reg: f64,
    pub dist_xstar: f64,
    pub dist_ustar_last: f64,
    pub dist_ustar_avg: f64,
    pub wall_ns: u64,
}

impl TraceRow {
    /// `f_last − f*`
    pub fn subopt_last(&self, f_star: f64) -> f64 {
        self.f_last - f_star
    }

    /// `f_avg − f*`
    pub fn subopt_avg(&self, f_star: f64) -> f64 {
        self.f_avg - f_star
    }
}

/// Ordered rows of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub method: Method,
    pub rows: Vec<TraceRow>,
    /// Reference optimal value, when known.
    pub f_star: Option<f64>,
}

impl IterationTrace {
    pub fn new(method: Method) -> Self {
        IterationTrace {
            method,
            rows: Vec::new(),
            f_star: None,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }
}
