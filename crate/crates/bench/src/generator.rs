//! Seeded random instances of the benchmark families.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Result};
use conic_dual_core::{
    Cone, ConicProblem, CsrMatrix, DenseMatrix, Matrix, ObjectiveOracle, SimpleSet,
};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Dimension above which `G` and `Q` are generated sparse.
pub const SPARSE_THRESHOLD: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Utility maximization: `γ < 0`, `a > 0`, `b = 0`, `u ≥ 0`.
    Num,
    /// Resource allocation: `γ > 0`, `a = 0`, `b ≠ 0`, box constraints.
    Res,
    /// Plain quadratic objective over `ℝⁿ`.
    Qp,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Num => "num",
            Family::Res => "res",
            Family::Qp => "qp",
        })
    }
}

impl FromStr for Family {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "num" => Ok(Family::Num),
            "res" => Ok(Family::Res),
            "qp" => Ok(Family::Qp),
            _ => bail!("unknown problem family '{s}' (expected num, res or qp)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeKind {
    Zero,
    Nonneg,
    Nonpos,
    Soc,
}

impl ConeKind {
    pub fn build(self, p: usize) -> Cone {
        match self {
            ConeKind::Zero => Cone::Zero(p),
            ConeKind::Nonneg => Cone::Nonneg(p),
            ConeKind::Nonpos => Cone::Nonpos(p),
            ConeKind::Soc => Cone::SecondOrder(p),
        }
    }

    pub fn of(cone: &Cone) -> Self {
        match cone {
            Cone::Zero(_) => ConeKind::Zero,
            Cone::Nonneg(_) => ConeKind::Nonneg,
            Cone::Nonpos(_) => ConeKind::Nonpos,
            Cone::SecondOrder(_) => ConeKind::Soc,
        }
    }
}

impl fmt::Display for ConeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConeKind::Zero => "zero",
            ConeKind::Nonneg => "nonneg",
            ConeKind::Nonpos => "nonpos",
            ConeKind::Soc => "soc",
        })
    }
}

impl FromStr for ConeKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(ConeKind::Zero),
            "nonneg" => Ok(ConeKind::Nonneg),
            "nonpos" => Ok(ConeKind::Nonpos),
            "soc" => Ok(ConeKind::Soc),
            _ => bail!("unknown cone '{s}' (expected zero, nonneg, nonpos or soc)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n: usize,
    /// Number of constraints; `3n/2` when absent.
    #[serde(default)]
    pub p: Option<usize>,
    pub family: Family,
    /// Defaults to `nonpos` (inequalities `Gu + g ≤ 0`).
    #[serde(default = "default_cone")]
    pub cone: ConeKind,
    /// Nonzeros per row of `G`; 50 when `n > 2000`, dense otherwise.
    #[serde(default)]
    pub sparsity: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_gamma")]
    pub gamma_abs: f64,
}

fn default_cone() -> ConeKind {
    ConeKind::Nonpos
}

fn default_gamma() -> f64 {
    0.5
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        GeneratorSpec {
            n,
            p: None,
            family,
            cone: default_cone(),
            sparsity: None,
            seed,
            gamma_abs: default_gamma(),
        }
    }

    pub fn rows(&self) -> usize {
        self.p.unwrap_or(3 * self.n / 2)
    }

    pub fn row_nonzeros(&self) -> Option<usize> {
        match self.sparsity {
            Some(s) => Some(s.min(self.n)),
            None if self.n > SPARSE_THRESHOLD => Some(50.min(self.n)),
            None => None,
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Builds an instance with `λ_min(Q) = 1` and a point `û` with
/// `Gû + g` in the interior of `K` (on `{0}` for the zero cone).
pub fn generate_problem(spec: &GeneratorSpec) -> Result<ConicProblem> {
    let n = spec.n;
    let p = spec.rows();
    if n < 2 {
        bail!("generator needs n >= 2, got {n}");
    }
    if p < 1 {
        bail!("generator needs p >= 1");
    }
    if spec.cone == ConeKind::Soc && p < 2 {
        bail!("second-order cone needs p >= 2");
    }
    if spec.sparsity == Some(0) {
        bail!("sparsity must be positive");
    }
    if !(spec.gamma_abs >= 0.0 && spec.gamma_abs.is_finite()) {
        bail!("gamma_abs must be a finite nonnegative number");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let nnz = spec.row_nonzeros();

    let q_mat = match nnz {
        None => dense_hessian(&mut rng, n),
        Some(s) => sparse_hessian(&mut rng, n, s)?,
    };
    let q: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();

    let (set, u_hat) = match spec.family {
        Family::Num => {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
            (SimpleSet::Nonneg(n), u)
        }
        Family::Res => {
            let lower: Vec<f64> = (0..n).map(|_| -rng.random_range(0.5..1.5)).collect();
            let upper: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            let u = lower
                .iter()
                .zip(&upper)
                .map(|(l, h)| l + (h - l) * rng.random_range(0.25..0.75))
                .collect();
            (SimpleSet::boxed(lower, upper)?, u)
        }
        Family::Qp => (
            SimpleSet::Whole(n),
            (0..n).map(|_| normal(&mut rng)).collect(),
        ),
    };

    let objective = match spec.family {
        Family::Num => {
            let a = (0..n).map(|_| normal(&mut rng).abs()).collect();
            ObjectiveOracle::quad_log(q_mat, q, -spec.gamma_abs, a, vec![0.0; n])?
        }
        Family::Res => {
            let scale = 1.0 / (n as f64).sqrt();
            let b = (0..n).map(|_| scale * normal(&mut rng)).collect();
            ObjectiveOracle::quad_log(q_mat, q, spec.gamma_abs, vec![0.0; n], b)?
        }
        Family::Qp => ObjectiveOracle::quadratic(q_mat, q)?,
    };

    let g_mat: Matrix = match nnz {
        None => {
            let data = (0..p * n).map(|_| normal(&mut rng)).collect();
            DenseMatrix::new(p, n, data)?.into()
        }
        Some(s) => sparse_gaussian(&mut rng, p, n, s)?.into(),
    };

    let slack = interior_point(&mut rng, spec.cone, p);
    let gu = g_mat.mul_vec(&u_hat);
    let g: Vec<f64> = slack.iter().zip(&gu).map(|(s, v)| s - v).collect();
    Ok(ConicProblem::new(
        objective,
        g_mat,
        g,
        spec.cone.build(p),
        set,
    )?)
}

/// `DᵀD + I` with `D` of size `⌊n/2⌋ × n`, so the smallest eigenvalue is one.
fn dense_hessian(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let m = n / 2;
    let sd = 1.0 / (n as f64).sqrt();
    let d: Vec<f64> = (0..m * n).map(|_| sd * normal(rng)).collect();
    let mut q = DenseMatrix::identity(n);
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for r in 0..m {
                s += d[r * n + i] * d[r * n + j];
            }
            q.set(i, j, q.get(i, j) + s);
            if i != j {
                q.set(j, i, q.get(j, i) + s);
            }
        }
    }
    q.into()
}

fn sparse_hessian(rng: &mut ChaCha8Rng, n: usize, s: usize) -> Result<Matrix> {
    let m = n / 2;
    let sd = 1.0 / (s as f64).sqrt();
    let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for (i, row) in acc.iter_mut().enumerate() {
        row.insert(i, 1.0);
    }
    for _ in 0..m {
        let mut cols = sample(rng, n, s).into_vec();
        cols.sort_unstable();
        let vals: Vec<f64> = (0..cols.len()).map(|_| sd * normal(rng)).collect();
        for (a, &i) in cols.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                *acc[i].entry(j).or_insert(0.0) += vals[a] * vals[b];
            }
        }
    }
    let mut indptr = vec![0];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for row in acc {
        for (j, v) in row {
            indices.push(j);
            values.push(v);
        }
        indptr.push(indices.len());
    }
    Ok(CsrMatrix::new(n, n, indptr, indices, values)?.into())
}

fn sparse_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, s: usize) -> Result<CsrMatrix> {
    let mut indptr = vec![0];
    let mut indices = Vec::with_capacity(rows * s);
    let mut values = Vec::with_capacity(rows * s);
    for _ in 0..rows {
        let mut idx = sample(rng, cols, s).into_vec();
        idx.sort_unstable();
        for j in idx {
            indices.push(j);
            values.push(normal(rng));
        }
        indptr.push(indices.len());
    }
    Ok(CsrMatrix::new(rows, cols, indptr, indices, values)?)
}

/// A point of `K` at distance at least one from its boundary.
fn interior_point(rng: &mut ChaCha8Rng, cone: ConeKind, p: usize) -> Vec<f64> {
    match cone {
        ConeKind::Zero => vec![0.0; p],
        ConeKind::Nonneg => (0..p).map(|_| 1.0 + rng.random::<f64>()).collect(),
        ConeKind::Nonpos => (0..p).map(|_| -1.0 - rng.random::<f64>()).collect(),
        ConeKind::Soc => {
            let z: Vec<f64> = (0..p - 1).map(|_| normal(rng)).collect();
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            // Distance from (t, z) to the boundary is (t − ‖z‖)/√2.
            let mut s = vec![norm + 2f64.sqrt() * (1.0 + rng.random::<f64>())];
            s.extend(z);
            s
        }
    }
}
