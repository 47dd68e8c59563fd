//! Problem data: objective, constraint map, cone and simple set.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cones::Cone;
use crate::error::{check_len, Error, Result};
use crate::linalg::{self, Matrix};
use crate::math::{dot, exp, ln, ln_1p};

/// `γ log(1 + aᵀu + exp(bᵀu))`
#[derive(Debug, Clone, PartialEq)]
pub struct LogTerm {
    pub gamma: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl LogTerm {
    /// `ln(1 + aᵀu + exp(bᵀu))` and the exponent `bᵀu`, computed without
    /// overflowing the exponential.
    fn log_argument(&self, u: &[f64]) -> Result<(f64, f64)> {
        let c = 1.0 + dot(&self.a, u);
        let s = dot(&self.b, u);
        let l = if c > 0.0 {
            let lc = ln(c);
            let (hi, lo) = if lc >= s { (lc, s) } else { (s, lc) };
            hi + ln_1p(exp(lo - hi))
        } else {
            let arg = c + exp(s);
            if !(arg > 0.0) {
                return Err(Error::Domain {
                    term: "log(1 + aᵀu + exp(bᵀu))",
                    value: arg,
                });
            }
            ln(arg)
        };
        Ok((l, s))
    }

    fn value(&self, u: &[f64]) -> Result<f64> {
        if self.gamma == 0.0 {
            return Ok(0.0);
        }
        Ok(self.gamma * self.log_argument(u)?.0)
    }

    fn add_gradient(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        if self.gamma == 0.0 {
            return Ok(());
        }
        let (l, s) = self.log_argument(u)?;
        let wa = self.gamma * exp(-l);
        let wb = self.gamma * exp(s - l);
        for ((o, a), b) in out.iter_mut().zip(&self.a).zip(&self.b) {
            *o += wa * a + wb * b;
        }
        Ok(())
    }

    /// Upper bound on the curvature of the term over the admissible region.
    fn curvature_bound(&self) -> f64 {
        self.gamma.abs() * (dot(&self.a, &self.a) + dot(&self.b, &self.b)) / 4.0
    }
}

/// Strongly convex objective `½uᵀQu + qᵀu`, optionally plus a [`LogTerm`].
#[derive(Debug, Clone)]
pub struct ObjectiveOracle {
    hessian: Matrix,
    linear: Vec<f64>,
    log_term: Option<LogTerm>,
    sigma_f: f64,
    lambda_max: f64,
}

impl ObjectiveOracle {
    /// `½uᵀQu + qᵀu` with `Q` symmetric positive definite.
    pub fn quadratic(q_mat: Matrix, q: Vec<f64>) -> Result<Self> {
        Self::build(q_mat, q, None)
    }

    /// `½uᵀQu + qᵀu + γ log(1 + aᵀu + exp(bᵀu))`.
    ///
    /// Only sign patterns that keep the log term convex are accepted:
    /// `γ = 0`, or `γ < 0` with `a ≥ 0` and `b = 0` (the set must then lie in
    /// the nonnegative orthant), or `γ > 0` with `a = 0` and `b ≠ 0`.
    pub fn quad_log(
        q_mat: Matrix,
        q: Vec<f64>,
        gamma: f64,
        a: Vec<f64>,
        b: Vec<f64>,
    ) -> Result<Self> {
        let n = q.len();
        check_len("log term vector a", n, a.len())?;
        check_len("log term vector b", n, b.len())?;
        if !gamma.is_finite() || a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("log term has non-finite entries".into()));
        }
        let a_zero = a.iter().all(|v| *v == 0.0);
        let b_zero = b.iter().all(|v| *v == 0.0);
        let ok = gamma == 0.0
            || (gamma < 0.0 && a.iter().all(|v| *v >= 0.0) && b_zero)
            || (gamma > 0.0 && a_zero && !b_zero);
        if !ok {
            return Err(Error::InvalidData(format!(
                "log term with gamma = {gamma} needs a >= 0, b = 0 (gamma < 0) or a = 0, b != 0 (gamma > 0)"
            )));
        }
        Self::build(q_mat, q, Some(LogTerm { gamma, a, b }))
    }

    fn build(hessian: Matrix, linear: Vec<f64>, log_term: Option<LogTerm>) -> Result<Self> {
        let n = linear.len();
        check_len("Q rows", n, hessian.rows())?;
        check_len("Q columns", n, hessian.cols())?;
        if linear.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("q has non-finite entries".into()));
        }
        let scale = hessian.max_abs().max(1.0);
        if !hessian.max_abs().is_finite() {
            return Err(Error::InvalidData("Q has non-finite entries".into()));
        }
        if hessian.asymmetry() > 1e-12 * scale {
            return Err(Error::InvalidData("Q is not symmetric".into()));
        }
        let lambda_min = linalg::symmetric_lambda_min(&hessian)?;
        if !(lambda_min > 0.0) {
            return Err(Error::NotStronglyConvex { lambda_min });
        }
        let lambda_max = linalg::psd_lambda_max(&hessian, 1e-10, 20 * n + 200)?;
        Ok(ObjectiveOracle {
            hessian,
            linear,
            log_term,
            sigma_f: lambda_min,
            lambda_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn hessian(&self) -> &Matrix {
        &self.hessian
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn log_term(&self) -> Option<&LogTerm> {
        self.log_term.as_ref()
    }

    /// True for the plain quadratic variant.
    pub fn is_quadratic(&self) -> bool {
        self.log_term.is_none()
    }

    /// Strong convexity modulus `σ_f = λ_min(Q)`.
    pub fn sigma_f(&self) -> f64 {
        self.sigma_f
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Lipschitz constant of `∇f` on the admissible region.
    pub fn gradient_lipschitz(&self) -> f64 {
        self.lambda_max + self.log_term.as_ref().map_or(0.0, LogTerm::curvature_bound)
    }

    pub fn value(&self, u: &[f64]) -> Result<f64> {
        check_len("objective argument", self.dim(), u.len())?;
        let qu = self.hessian.mul_vec(u);
        let mut v = 0.5 * dot(u, &qu) + dot(&self.linear, u);
        if let Some(t) = &self.log_term {
            v += t.value(u)?;
        }
        Ok(v)
    }

    pub fn gradient_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("objective argument", self.dim(), u.len())?;
        self.hessian.mul_vec_into(u, out);
        for (o, l) in out.iter_mut().zip(&self.linear) {
            *o += l;
        }
        if let Some(t) = &self.log_term {
            t.add_gradient(u, out)?;
        }
        Ok(())
    }

    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.gradient_into(u, &mut out)?;
        Ok(out)
    }

    fn needs_nonneg_domain(&self) -> bool {
        self.log_term
            .as_ref()
            .is_some_and(|t| t.gamma < 0.0 && t.a.iter().any(|v| *v != 0.0))
    }
}

/// Simple set `U` with a cheap Euclidean projection.
#[derive(Debug, Clone, PartialEq)]
pub enum SimpleSet {
    Whole(usize),
    Nonneg(usize),
    /// Componentwise bounds; infinite entries are allowed.
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

impl SimpleSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_len("box upper bounds", lower.len(), upper.len())?;
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| l.is_nan() || u.is_nan() || l > u)
        {
            return Err(Error::InvalidData(
                "box bounds must satisfy lb <= ub".into(),
            ));
        }
        Ok(SimpleSet::Box { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            SimpleSet::Whole(n) | SimpleSet::Nonneg(n) => *n,
            SimpleSet::Box { lower, .. } => lower.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SimpleSet::Whole(_) => "whole",
            SimpleSet::Nonneg(_) => "nonneg",
            SimpleSet::Box { .. } => "box",
        }
    }

    pub fn project_in_place(&self, u: &mut [f64]) {
        match self {
            SimpleSet::Whole(_) => {}
            SimpleSet::Nonneg(_) => u.iter_mut().for_each(|x| *x = x.max(0.0)),
            SimpleSet::Box { lower, upper } => {
                for ((x, l), h) in u.iter_mut().zip(lower).zip(upper) {
                    *x = x.max(*l).min(*h);
                }
            }
        }
    }

    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        let mut out = u.to_vec();
        self.project_in_place(&mut out);
        out
    }

    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        match self {
            SimpleSet::Whole(_) => true,
            SimpleSet::Nonneg(_) => u.iter().all(|x| *x >= -tol),
            SimpleSet::Box { lower, upper } => u
                .iter()
                .zip(lower)
                .zip(upper)
                .all(|((x, l), h)| *x >= l - tol && *x <= h + tol),
        }
    }

    fn within_nonneg_orthant(&self) -> bool {
        match self {
            SimpleSet::Whole(_) => false,
            SimpleSet::Nonneg(_) => true,
            SimpleSet::Box { lower, .. } => lower.iter().all(|l| *l >= 0.0),
        }
    }
}

/// `min f(u)  s.t.  G u + g ∈ K,  u ∈ U`.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    objective: ObjectiveOracle,
    g_mat: Matrix,
    g: Vec<f64>,
    cone: Cone,
    set: SimpleSet,
}

impl ConicProblem {
    pub fn new(
        objective: ObjectiveOracle,
        g_mat: Matrix,
        g: Vec<f64>,
        cone: Cone,
        set: SimpleSet,
    ) -> Result<Self> {
        let n = objective.dim();
        check_len("G columns", n, g_mat.cols())?;
        check_len("simple set dimension", n, set.dim())?;
        check_len("g", g_mat.rows(), g.len())?;
        check_len("cone dimension", g_mat.rows(), cone.dim())?;
        if g.iter().any(|v| !v.is_finite()) || !g_mat.max_abs().is_finite() {
            return Err(Error::InvalidData("G or g has non-finite entries".into()));
        }
        if let Cone::SecondOrder(p) = cone {
            if p == 0 {
                return Err(Error::InvalidData(
                    "second-order cone needs dimension >= 1".into(),
                ));
            }
        }
        if objective.needs_nonneg_domain() && !set.within_nonneg_orthant() {
            return Err(Error::InvalidData(
                "a log term with gamma < 0 and a != 0 needs U inside the nonnegative orthant"
                    .into(),
            ));
        }
        Ok(ConicProblem {
            objective,
            g_mat,
            g,
            cone,
            set,
        })
    }

    pub fn objective(&self) -> &ObjectiveOracle {
        &self.objective
    }

    pub fn constraint_matrix(&self) -> &Matrix {
        &self.g_mat
    }

    pub fn constraint_offset(&self) -> &[f64] {
        &self.g
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn set(&self) -> &SimpleSet {
        &self.set
    }

    /// Number of primal variables.
    pub fn n(&self) -> usize {
        self.objective.dim()
    }

    /// Number of constraints (dual variables).
    pub fn p(&self) -> usize {
        self.g.len()
    }

    /// `G u + g`
    pub fn constraint_value(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.g_mat.mul_vec(u);
        for (o, gi) in out.iter_mut().zip(&self.g) {
            *o += gi;
        }
        out
    }

    /// Dual Lipschitz constant `L_d = ‖G‖² / σ_f`.
    pub fn lipschitz_dual_constant(&self) -> Result<f64> {
        let norm = linalg::spectral_norm(&self.g_mat)?;
        Ok(norm * norm / self.objective.sigma_f())
    }
}
