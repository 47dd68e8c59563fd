//! Trace CSV files: one row per dual iterate, floats with 17 significant digits.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use conic_dual_core::methods::{IterationTrace, Phase, TraceRow};
use conic_dual_core::Method;

pub const COLUMNS: [&str; 10] = [
    "k",
    "d",
    "grad_norm",
    "gradmap_norm",
    "infeas_last",
    "subopt_last",
    "infeas_avg",
    "subopt_avg",
    "dist_x0",
    "wall_ns",
];

/// One parsed CSV row. Suboptimality columns are `f − f*` and NaN when the
/// run had no reference value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub k: usize,
    pub d: f64,
    pub grad_norm: f64,
    pub gradmap_norm: f64,
    pub infeas_last: f64,
    pub subopt_last: f64,
    pub infeas_avg: f64,
    pub subopt_avg: f64,
    pub dist_x0: f64,
    pub wall_ns: u64,
}

fn fmt_f(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // `inf`, `-inf` and `NaN` parse back with `str::parse::<f64>`.
        format!("{v}")
    }
}

pub fn write_trace<W: Write>(trace: &IterationTrace, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COLUMNS)?;
    let fs = trace.f_star.unwrap_or(f64::NAN);
    for r in &trace.rows {
        w.write_record([
            r.k.to_string(),
            fmt_f(r.d),
            fmt_f(r.grad_norm),
            fmt_f(r.gradmap_norm),
            fmt_f(r.infeas_last),
            fmt_f(r.subopt_last(fs)),
            fmt_f(r.infeas_avg),
            fmt_f(r.subopt_avg(fs)),
            fmt_f(r.dist_x0),
            r.wall_ns.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_trace(trace: &IterationTrace, path: &Path) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_trace(trace, f)
}

pub fn read_trace<R: Read>(reader: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    let mut pos = [0usize; 10];
    for (slot, name) in pos.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .with_context(|| format!("trace is missing column '{name}'"))?;
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            let s = rec.get(pos[i]).unwrap_or("").trim();
            s.parse().with_context(|| {
                format!(
                    "row {}: bad value '{s}' in column '{}'",
                    line + 1,
                    COLUMNS[i]
                )
            })
        };
        let k = rec.get(pos[0]).unwrap_or("").trim();
        let wall = rec.get(pos[9]).unwrap_or("").trim();
        rows.push(CsvRow {
            k: k.parse()
                .with_context(|| format!("row {}: bad iteration '{k}'", line + 1))?,
            d: f(1)?,
            grad_norm: f(2)?,
            gradmap_norm: f(3)?,
            infeas_last: f(4)?,
            subopt_last: f(5)?,
            infeas_avg: f(6)?,
            subopt_avg: f(7)?,
            dist_x0: f(8)?,
            wall_ns: wall
                .parse()
                .with_context(|| format!("row {}: bad wall_ns '{wall}'", line + 1))?,
        });
    }
    Ok(rows)
}

pub fn load_trace(path: &Path) -> Result<Vec<CsvRow>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_trace(f).with_context(|| format!("reading {}", path.display()))
}

/// Rebuilds an [`IterationTrace`] from CSV rows so that envelopes can be
/// checked offline. Columns absent from the CSV are NaN.
pub fn to_iteration_trace(
    rows: &[CsvRow],
    method: Method,
    f_star: Option<f64>,
    hybrid_split: Option<usize>,
) -> Result<IterationTrace> {
    if rows.is_empty() {
        bail!("trace has no rows");
    }
    let fs = f_star.unwrap_or(f64::NAN);
    let mut trace = IterationTrace::new(method);
    trace.f_star = f_star;
    for r in rows {
        let phase = match method {
            Method::Dg => Phase::Dg,
            Method::Dfg | Method::Rdfg => Phase::Dfg,
            Method::RegDfg => Phase::RegDfg,
            Method::Hybrid => match hybrid_split {
                Some(s) if r.k > s => Phase::Dg,
                _ => Phase::Dfg,
            },
        };
        trace.rows.push(TraceRow {
            k: r.k,
            epoch: 0,
            phase,
            d: r.d,
            grad_norm: r.grad_norm,
            gradmap_norm: r.gradmap_norm,
            infeas_last: r.infeas_last,
            f_last: r.subopt_last + fs,
            infeas_avg: r.infeas_avg,
            f_avg: r.subopt_avg + fs,
            dist_x0: r.dist_x0,
            x_norm: f64::NAN,
            step_norm: f64::NAN,
            alpha: f64::NAN,
            d_reg: f64::NAN,
            dist_xstar: f64::NAN,
            dist_ustar_last: f64::NAN,
            dist_ustar_avg: f64::NAN,
            wall_ns: r.wall_ns,
        });
    }
    Ok(trace)
}
