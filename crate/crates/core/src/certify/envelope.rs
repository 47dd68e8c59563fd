//! Comparing recorded traces against convergence envelopes.

use alloc::format;
use alloc::vec::Vec;

use super::bounds::{theoretical_bound, BoundConstants, BoundFamily};
use crate::error::{Error, Result};
use crate::methods::{IterationTrace, Method, Phase, TraceRow};

/// Tolerance added to every bound: `max(relative · |bound|, absolute)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slack {
    pub relative: f64,
    pub absolute: f64,
}

impl Default for Slack {
    fn default() -> Self {
        Slack {
            relative: 1e-6,
            absolute: 1e-10,
        }
    }
}

impl Slack {
    pub fn allows(&self, metric: f64, bound: f64) -> bool {
        metric <= bound + (self.relative * bound.abs()).max(self.absolute)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePoint {
    /// Trace row index.
    pub row_k: usize,
    /// Index the bound was evaluated at.
    pub bound_k: usize,
    pub metric: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundEnvelope {
    pub family: BoundFamily,
    pub points: Vec<EnvelopePoint>,
    /// First row whose metric exceeded the bound.
    pub violated_at: Option<usize>,
    pub violations: usize,
    /// Largest `metric / bound` seen.
    pub worst_ratio: f64,
}

impl BoundEnvelope {
    pub fn holds(&self) -> bool {
        self.violated_at.is_none()
    }
}

enum Indexing {
    /// Row `k` against bound index `k`.
    Standard,
    /// Even rows `2k` against bound index `k`.
    EvenHalf,
    /// The row `2k` closing a hybrid run with split `k`.
    HybridEnd,
    /// Only the final row; the bound does not depend on `k`.
    Final,
}

fn spec(family: BoundFamily) -> Result<(Method, Indexing)> {
    use BoundFamily::*;
    Ok(match family {
        DgDualGap | DgLastInfeas | DgLastSubopt | DgAvgInfeas | DgAvgSuboptLower
        | DgAvgSuboptUpper | DgAvgDistance | EbDgDistance | EbDgGap => {
            (Method::Dg, Indexing::Standard)
        }
        DfgDualGap | DfgLastInfeas | DfgLastSubopt | DfgAvgInfeas | DfgAvgSubopt => {
            (Method::Dfg, Indexing::Standard)
        }
        Lin2kDgInfeas | Lin2kDgSubopt | Cone2kDgInfeas | Cone2kDgSuboptLower
        | Cone2kDgSuboptUpper => (Method::Dg, Indexing::EvenHalf),
        LinHybridInfeas
        | LinHybridSubopt
        | ConeHybridInfeas
        | ConeHybridSuboptLower
        | ConeHybridSuboptUpper => (Method::Hybrid, Indexing::HybridEnd),
        RegDfgInfeas => (Method::RegDfg, Indexing::Final),
        RdfgBudget | RegDfgBudget => {
            return Err(Error::Config(format!(
                "{family} is an iteration budget, not a trace envelope"
            )))
        }
    })
}

fn metric(family: BoundFamily, row: &TraceRow, f_star: Option<f64>) -> Result<f64> {
    use BoundFamily::*;
    let fs = || f_star.ok_or_else(|| Error::Config(format!("{family} needs the optimal value f*")));
    Ok(match family {
        DgDualGap | DfgDualGap | EbDgGap => fs()? - row.d,
        DgLastInfeas | DfgLastInfeas | Lin2kDgInfeas | LinHybridInfeas | Cone2kDgInfeas
        | ConeHybridInfeas | RegDfgInfeas => row.infeas_last,
        DgLastSubopt | DfgLastSubopt | Lin2kDgSubopt | LinHybridSubopt => {
            (row.f_last - fs()?).abs()
        }
        DgAvgInfeas | DfgAvgInfeas => row.infeas_avg,
        DgAvgSuboptLower => fs()? - row.f_avg,
        DgAvgSuboptUpper => row.f_avg - fs()?,
        DfgAvgSubopt => (row.f_avg - fs()?).abs(),
        DgAvgDistance => {
            if row.dist_ustar_avg.is_nan() && !row.f_avg.is_nan() {
                return Err(Error::Config(format!("{family} needs a monitored u*")));
            }
            row.dist_ustar_avg * row.dist_ustar_avg
        }
        EbDgDistance => {
            if row.dist_xstar.is_nan() {
                return Err(Error::Config(format!("{family} needs a monitored x*")));
            }
            row.dist_xstar
        }
        Cone2kDgSuboptLower | ConeHybridSuboptLower => fs()? - row.f_last,
        Cone2kDgSuboptUpper | ConeHybridSuboptUpper => row.f_last - fs()?,
        RdfgBudget | RegDfgBudget => unreachable!("rejected by spec()"),
    })
}

/// Checks every applicable row of `trace` against the envelope of `family`.
///
/// The optimal value is taken from `trace.f_star`. Rows whose metric is
/// undefined (NaN, such as the fast-gradient average at `k = 0`) are skipped.
pub fn check_envelope(
    trace: &IterationTrace,
    family: BoundFamily,
    constants: &BoundConstants,
    slack: Slack,
) -> Result<BoundEnvelope> {
    let (method, indexing) = spec(family)?;
    if trace.method != method {
        return Err(Error::Config(format!(
            "{family} applies to {method} traces, not {}",
            trace.method
        )));
    }
    let mut selected: Vec<(&TraceRow, usize)> = Vec::new();
    match indexing {
        Indexing::Standard => {
            for row in &trace.rows {
                if row.k >= family.min_k() {
                    selected.push((row, row.k));
                }
            }
        }
        Indexing::EvenHalf => {
            for row in &trace.rows {
                if row.k >= 2 && row.k % 2 == 0 {
                    selected.push((row, row.k / 2));
                }
            }
        }
        Indexing::HybridEnd => {
            let split = constants
                .hybrid_split
                .ok_or_else(|| Error::Config(format!("{family} needs the hybrid split k")))?;
            let row = trace
                .rows
                .iter()
                .find(|r| r.k == 2 * split)
                .ok_or_else(|| Error::Config(format!("trace has no row 2k = {}", 2 * split)))?;
            if split > 0 && row.phase != Phase::Dg {
                return Err(Error::Config(
                    "final hybrid row is not a gradient step".into(),
                ));
            }
            selected.push((row, split));
        }
        Indexing::Final => {
            if let Some(row) = trace.rows.last() {
                selected.push((row, row.k));
            }
        }
    }

    let mut env = BoundEnvelope {
        family,
        points: Vec::with_capacity(selected.len()),
        violated_at: None,
        violations: 0,
        worst_ratio: f64::NEG_INFINITY,
    };
    for (row, bk) in selected {
        let m = metric(family, row, trace.f_star)?;
        if m.is_nan() {
            continue;
        }
        let b = theoretical_bound(family, bk, constants)?;
        if !slack.allows(m, b) {
            env.violations += 1;
            env.violated_at.get_or_insert(row.k);
        }
        if b > 0.0 {
            env.worst_ratio = env.worst_ratio.max(m / b);
        }
        env.points.push(EnvelopePoint {
            row_k: row.k,
            bound_k: bk,
            metric: m,
            bound: b,
        });
    }
    Ok(env)
}
