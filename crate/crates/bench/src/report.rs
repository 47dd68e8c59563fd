//! JSON run reports.
//!
//! Undefined quantities (NaN in the trace) are written as `null`. Only the
//! `wall_ns` fields depend on the machine; everything else is reproducible.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use conic_dual_core::certify::BoundEnvelope;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{BenchConfig, SolveSettings};

/// How the stopping tests were combined, echoed in every report.
pub const STOP_RULE_NOTE: &str =
    "a recovery stops when |d(x^k) - d(x^(k-1))| <= eps^2 and dist_K(G u + g) <= eps hold together (stop_rule = both)";

pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub n: usize,
    pub p: usize,
    pub cone: String,
    pub set: String,
    pub objective: String,
    /// Problem file or generator description.
    pub source: String,
}

/// Final iterate measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub d: Option<f64>,
    /// `|d(x^k) − d(x^{k−1})|`
    pub ds: Option<f64>,
    pub infeas_last: Option<f64>,
    pub infeas_avg: Option<f64>,
    pub f_last: Option<f64>,
    pub f_avg: Option<f64>,
    pub subopt_last: Option<f64>,
    pub subopt_avg: Option<f64>,
    pub gradmap_norm: Option<f64>,
}

/// Constants of the run, enough to re-check envelopes from the trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub l_d: f64,
    pub l_g: f64,
    pub sigma_f: f64,
    pub x0_norm: f64,
    pub f_star: Option<f64>,
    pub r_d: Option<f64>,
    pub reference_source: Option<String>,
    pub reference_kkt: Option<f64>,
    pub kappa: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: f64,
    pub hybrid_k: Option<usize>,
    pub regdfg_budget: Option<usize>,
    pub restart_interval: Option<usize>,
    pub r_d_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeVerdict {
    pub family: String,
    pub holds: bool,
    pub checked: usize,
    pub violated_at: Option<usize>,
    pub violations: usize,
    /// Largest metric/bound ratio seen.
    pub worst_ratio: Option<f64>,
}

impl From<&BoundEnvelope> for EnvelopeVerdict {
    fn from(e: &BoundEnvelope) -> Self {
        EnvelopeVerdict {
            family: e.family.name().to_string(),
            holds: e.holds(),
            checked: e.points.len(),
            violated_at: e.violated_at,
            violations: e.violations,
            worst_ratio: finite(e.worst_ratio),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub config: SolveSettings,
    pub problem: ProblemSummary,
    pub termination: String,
    pub converged: bool,
    pub iterations: usize,
    /// First iteration at which each recovery passed the stopping rule.
    pub stop_last: Option<usize>,
    pub stop_avg: Option<usize>,
    pub stop_rule_note: String,
    pub certificates: Certificates,
    pub constants: Constants,
    pub envelopes: Vec<EnvelopeVerdict>,
    pub restarts: usize,
    pub trace_path: Option<String>,
    pub wall_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub instance: String,
    pub seed: Option<u64>,
    pub method: String,
    pub recovery: String,
    pub converged: bool,
    /// Iterations until this recovery stopped.
    pub iterations: Option<usize>,
    pub infeasibility: Option<f64>,
    pub error: Option<String>,
    pub trace_path: Option<String>,
    pub wall_ns: u64,
}

/// One cell of the iteration table: a method and recovery over all instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub method: String,
    pub recovery: String,
    pub runs: usize,
    pub converged: usize,
    /// Mean iterations over converged runs.
    pub mean_iterations: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub stop_rule_note: String,
    pub runs: Vec<BenchRun>,
    pub table: Vec<TableEntry>,
}

impl BenchReport {
    pub fn run(&self, instance: &str, method: &str, recovery: &str) -> Option<&BenchRun> {
        self.runs
            .iter()
            .find(|r| r.instance == instance && r.method == method && r.recovery == recovery)
    }
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
