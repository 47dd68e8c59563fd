//! JSON problem files.
//!
//! ```json
//! {
//!   "objective": {"kind": "quadratic", "Q": [[1, 0], [0, 1]], "q": [0, 0]},
//!   "G": [[1, 1]],
//!   "g": [-1],
//!   "cone": {"kind": "zero", "dim": 1},
//!   "set": {"kind": "whole"}
//! }
//! ```
//!
//! A matrix is either a dense array of rows or a CSR object with `rows`,
//! `cols`, `indptr`, `indices` and `values`. The `quadlog` objective adds
//! `gamma`, `a` and `b`. Box sets carry `lb` and `ub`, where `null` stands
//! for an infinite bound.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use conic_dual_core::{ConicProblem, CsrMatrix, DenseMatrix, Matrix, ObjectiveOracle, SimpleSet};
use serde::{Deserialize, Serialize};

use crate::generator::ConeKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixFile {
    Dense(Vec<Vec<f64>>),
    Csr {
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ObjectiveFile {
    Quadratic {
        #[serde(rename = "Q")]
        hessian: MatrixFile,
        q: Vec<f64>,
    },
    Quadlog {
        #[serde(rename = "Q")]
        hessian: MatrixFile,
        q: Vec<f64>,
        gamma: f64,
        a: Vec<f64>,
        b: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeFile {
    pub kind: ConeKind,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Whole,
    Nonneg,
    Box,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetFile {
    pub kind: SetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lb: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ub: Option<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub objective: ObjectiveFile,
    #[serde(rename = "G")]
    pub g_mat: MatrixFile,
    pub g: Vec<f64>,
    pub cone: ConeFile,
    pub set: SetFile,
}

impl MatrixFile {
    pub fn from_matrix(m: &Matrix) -> Self {
        match m {
            Matrix::Dense(d) => MatrixFile::Dense(d.to_rows()),
            Matrix::Sparse(s) => MatrixFile::Csr {
                rows: s.rows(),
                cols: s.cols(),
                indptr: s.indptr().to_vec(),
                indices: s.indices().to_vec(),
                values: s.values().to_vec(),
            },
        }
    }

    /// `cols` is needed for an empty dense matrix.
    pub fn to_matrix(&self, cols: usize) -> Result<Matrix> {
        Ok(match self {
            MatrixFile::Dense(rows) if rows.is_empty() => DenseMatrix::zeros(0, cols).into(),
            MatrixFile::Dense(rows) => DenseMatrix::from_rows(rows)?.into(),
            MatrixFile::Csr {
                rows,
                cols,
                indptr,
                indices,
                values,
            } => CsrMatrix::new(
                *rows,
                *cols,
                indptr.clone(),
                indices.clone(),
                values.clone(),
            )?
            .into(),
        })
    }
}

fn bound_out(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl ProblemFile {
    pub fn from_problem(p: &ConicProblem) -> Self {
        let obj = p.objective();
        let hessian = MatrixFile::from_matrix(obj.hessian());
        let q = obj.linear().to_vec();
        let objective = match obj.log_term() {
            None => ObjectiveFile::Quadratic { hessian, q },
            Some(t) => ObjectiveFile::Quadlog {
                hessian,
                q,
                gamma: t.gamma,
                a: t.a.clone(),
                b: t.b.clone(),
            },
        };
        let set = match p.set() {
            SimpleSet::Whole(_) => SetFile {
                kind: SetKind::Whole,
                lb: None,
                ub: None,
            },
            SimpleSet::Nonneg(_) => SetFile {
                kind: SetKind::Nonneg,
                lb: None,
                ub: None,
            },
            SimpleSet::Box { lower, upper } => SetFile {
                kind: SetKind::Box,
                lb: Some(lower.iter().copied().map(bound_out).collect()),
                ub: Some(upper.iter().copied().map(bound_out).collect()),
            },
        };
        ProblemFile {
            objective,
            g_mat: MatrixFile::from_matrix(p.constraint_matrix()),
            g: p.constraint_offset().to_vec(),
            cone: ConeFile {
                kind: ConeKind::of(p.cone()),
                dim: p.cone().dim(),
            },
            set,
        }
    }

    pub fn to_problem(&self) -> Result<ConicProblem> {
        let (hessian, q) = match &self.objective {
            ObjectiveFile::Quadratic { hessian, q } | ObjectiveFile::Quadlog { hessian, q, .. } => {
                (hessian, q)
            }
        };
        let n = q.len();
        let q_mat = hessian.to_matrix(n).context("objective Q")?;
        let objective = match &self.objective {
            ObjectiveFile::Quadratic { .. } => ObjectiveOracle::quadratic(q_mat, q.clone())?,
            ObjectiveFile::Quadlog { gamma, a, b, .. } => {
                ObjectiveOracle::quad_log(q_mat, q.clone(), *gamma, a.clone(), b.clone())?
            }
        };
        let set = match self.set.kind {
            SetKind::Whole => SimpleSet::Whole(n),
            SetKind::Nonneg => SimpleSet::Nonneg(n),
            SetKind::Box => {
                let (Some(lb), Some(ub)) = (&self.set.lb, &self.set.ub) else {
                    bail!("box set needs both lb and ub");
                };
                let lower = lb.iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect();
                let upper = ub.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect();
                SimpleSet::boxed(lower, upper)?
            }
        };
        let g_mat = self.g_mat.to_matrix(n).context("constraint matrix G")?;
        let cone = self.cone.kind.build(self.cone.dim);
        Ok(ConicProblem::new(
            objective,
            g_mat,
            self.g.clone(),
            cone,
            set,
        )?)
    }
}

pub fn write_problem<W: Write>(problem: &ConicProblem, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    serde_json::to_writer(&mut w, &ProblemFile::from_problem(problem))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_problem<R: Read>(reader: R) -> Result<ConicProblem> {
    let file: ProblemFile =
        serde_json::from_reader(BufReader::new(reader)).context("parsing problem JSON")?;
    file.to_problem()
}

pub fn save_problem(problem: &ConicProblem, path: &Path) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_problem(problem, f)
}

pub fn load_problem(path: &Path) -> Result<ConicProblem> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_problem(f).with_context(|| format!("loading {}", path.display()))
}
