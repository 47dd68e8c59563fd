//! Inner minimization `u(x) = argmin_{u ∈ U} f(u) + ⟨x, -Gu - g⟩` and the
//! dual function value and gradient it yields.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::linalg::{Cholesky, DenseMatrix};
use crate::math::{dist, dot, norm, sqrt};
use crate::model::{ConicProblem, SimpleSet};

/// Largest dimension factored densely for the unconstrained quadratic case.
const DENSE_FACTOR_LIMIT: usize = 2000;

/// Tolerance used when checking that a dual point lies in `K*`.
pub const DUAL_CONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    /// Target for the inner stationarity residual. The residual is compared
    /// against `tol · max(1, ‖Gᵀx − q‖)` so that the target stays above the
    /// rounding floor when multipliers grow.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        InnerOptions {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// Result of one inner solve at a dual point `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualOracleResult {
    /// Inner minimizer `u(x)`.
    pub u: Vec<f64>,
    /// Dual value `d(x)`.
    pub value: f64,
    /// Dual gradient `∇d(x) = −G u(x) − g`.
    pub gradient: Vec<f64>,
    /// `‖u − Π_U(u − ∇_u L(u, x))‖` at the returned point.
    pub inner_residual: f64,
    pub inner_iterations: usize,
}

/// Projected gradient step on the dual: `x⁺ = Π_{K*}(x + ∇d(x)/L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMapResult {
    pub x_plus: Vec<f64>,
    /// `‖x⁺ − x‖`
    pub norm: f64,
    pub oracle: DualOracleResult,
}

#[derive(Debug, Clone)]
enum Route {
    Factored(Cholesky),
    Separable(Vec<f64>),
    Accelerated { lipschitz: f64 },
}

/// Evaluates `d(x)` and `∇d(x)` for a fixed problem, caching whatever the
/// inner solver can reuse between calls.
#[derive(Debug, Clone)]
pub struct DualOracle<'p> {
    problem: &'p ConicProblem,
    route: Route,
    options: InnerOptions,
}

impl<'p> DualOracle<'p> {
    pub fn new(problem: &'p ConicProblem, options: InnerOptions) -> Result<Self> {
        let obj = problem.objective();
        let route = if obj.is_quadratic() {
            if let Some(diag) = obj.hessian().diagonal_if_diagonal() {
                Route::Separable(diag)
            } else if matches!(problem.set(), SimpleSet::Whole(_))
                && problem.n() <= DENSE_FACTOR_LIMIT
            {
                Route::Factored(Cholesky::factor(&obj.hessian().to_dense())?)
            } else {
                Route::Accelerated {
                    lipschitz: obj.gradient_lipschitz() * (1.0 + 1e-9),
                }
            }
        } else {
            Route::Accelerated {
                lipschitz: obj.gradient_lipschitz() * (1.0 + 1e-9),
            }
        };
        Ok(DualOracle {
            problem,
            route,
            options,
        })
    }

    pub fn problem(&self) -> &'p ConicProblem {
        self.problem
    }

    pub fn options(&self) -> InnerOptions {
        self.options
    }

    /// Solves the inner problem at `x`, warm-starting the iterative route from `warm`.
    pub fn evaluate(&self, x: &[f64], warm: Option<&[f64]>) -> Result<DualOracleResult> {
        let prob = self.problem;
        check_len("dual point", prob.p(), x.len())?;
        let obj = prob.objective();
        let gtx = prob.constraint_matrix().mul_t_vec(x);
        let shift: Vec<f64> = gtx.iter().zip(obj.linear()).map(|(a, b)| a - b).collect();
        let tol = self.options.tol * norm(&shift).max(1.0);

        let (u, iterations) = match &self.route {
            Route::Factored(chol) => (chol.solve(&shift), 0),
            Route::Separable(diag) => {
                let mut u: Vec<f64> = shift.iter().zip(diag).map(|(s, d)| s / d).collect();
                prob.set().project_in_place(&mut u);
                (u, 0)
            }
            Route::Accelerated { lipschitz } => self.accelerated(&gtx, warm, *lipschitz, tol)?,
        };

        let residual = self.stationarity(&u, &gtx)?;
        let gu = prob.constraint_value(&u);
        let value = obj.value(&u)? - dot(x, &gu);
        let gradient = gu.into_iter().map(|v| -v).collect();
        Ok(DualOracleResult {
            u,
            value,
            gradient,
            inner_residual: residual,
            inner_iterations: iterations,
        })
    }

    /// `‖u − Π_U(u − (∇f(u) − Gᵀx))‖`
    fn stationarity(&self, u: &[f64], gtx: &[f64]) -> Result<f64> {
        let mut step = self.problem.objective().gradient(u)?;
        for ((s, ui), c) in step.iter_mut().zip(u).zip(gtx) {
            *s = ui - (*s - c);
        }
        self.problem.set().project_in_place(&mut step);
        Ok(dist(u, &step))
    }

    /// Accelerated projected gradient with strong-convexity momentum and
    /// gradient-based restarts.
    fn accelerated(
        &self,
        gtx: &[f64],
        warm: Option<&[f64]>,
        lipschitz: f64,
        tol: f64,
    ) -> Result<(Vec<f64>, usize)> {
        let prob = self.problem;
        let obj = prob.objective();
        let set = prob.set();
        let n = prob.n();
        let sigma = obj.sigma_f();
        let beta = (sqrt(lipschitz) - sqrt(sigma)) / (sqrt(lipschitz) + sqrt(sigma));

        let mut u = match warm {
            Some(w) if w.len() == n => set.project(w),
            _ => set.project(&vec![0.0; n]),
        };
        if obj.value(&u).is_err() {
            u = set.project(&vec![0.0; n]);
        }
        let mut u_prev = u.clone();
        let mut v = vec![0.0; n];
        let mut grad = vec![0.0; n];
        let mut next = vec![0.0; n];
        let mut last_check = f64::INFINITY;

        for it in 0..self.options.max_iter {
            for i in 0..n {
                v[i] = u[i] + beta * (u[i] - u_prev[i]);
            }
            if obj.gradient_into(&v, &mut grad).is_err() {
                v.copy_from_slice(&u);
                obj.gradient_into(&v, &mut grad)?;
            }
            for i in 0..n {
                next[i] = v[i] - (grad[i] - gtx[i]) / lipschitz;
            }
            set.project_in_place(&mut next);
            let step = dist(&v, &next) * lipschitz;
            if step <= tol {
                last_check = self.stationarity(&next, gtx)?;
                if last_check <= tol {
                    return Ok((next, it + 1));
                }
            }
            // Restart when the step disagrees with the momentum direction.
            let mut agree = 0.0;
            for i in 0..n {
                agree += (v[i] - next[i]) * (next[i] - u[i]);
            }
            if agree > 0.0 {
                u_prev.copy_from_slice(&next);
            } else {
                u_prev.copy_from_slice(&u);
            }
            u.copy_from_slice(&next);
        }
        Err(Error::NoConvergence {
            what: "inner accelerated gradient",
            iterations: self.options.max_iter,
            residual: last_check.min(self.stationarity(&u, gtx)?),
        })
    }

    /// Gradient map at `x ∈ K*` with constant `l_d`.
    pub fn gradient_map(
        &self,
        x: &[f64],
        l_d: f64,
        warm: Option<&[f64]>,
    ) -> Result<GradientMapResult> {
        let cone = self.problem.cone();
        let off = cone.dual_distance(x);
        if off > DUAL_CONE_TOL * norm(x).max(1.0) {
            return Err(Error::OutsideDualCone { distance: off });
        }
        let oracle = self.evaluate(x, warm)?;
        let x_plus = dual_ascent_step(cone, x, &oracle.gradient, 1.0 / l_d);
        let norm = dist(&x_plus, x);
        Ok(GradientMapResult {
            x_plus,
            norm,
            oracle,
        })
    }
}

/// `Π_{K*}(x + α ∇)`
pub(crate) fn dual_ascent_step(
    cone: &crate::cones::Cone,
    x: &[f64],
    grad: &[f64],
    alpha: f64,
) -> Vec<f64> {
    let mut out: Vec<f64> = x.iter().zip(grad).map(|(a, g)| a + alpha * g).collect();
    cone.project_dual_in_place(&mut out);
    out
}

/// One-shot inner solve with default options.
pub fn inner_solve(problem: &ConicProblem, x: &[f64], tol: f64) -> Result<DualOracleResult> {
    let opts = InnerOptions {
        tol,
        ..InnerOptions::default()
    };
    DualOracle::new(problem, opts)?.evaluate(x, None)
}

/// One-shot gradient map with default options.
pub fn gradient_map(problem: &ConicProblem, x: &[f64], l_d: f64) -> Result<GradientMapResult> {
    DualOracle::new(problem, InnerOptions::default())?.gradient_map(x, l_d, None)
}

/// Dense `G Q⁻¹ Gᵀ` used by closed-form reference solutions.
pub(crate) fn schur_complement(
    problem: &ConicProblem,
    chol: &Cholesky,
    rows: &[usize],
) -> DenseMatrix {
    let g = problem.constraint_matrix();
    let n = problem.n();
    let m = rows.len();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut e = vec![0.0; problem.p()];
    for &r in rows {
        e[r] = 1.0;
        let gt = g.mul_t_vec(&e);
        e[r] = 0.0;
        cols.push(chol.solve(&gt));
    }
    let mut h = DenseMatrix::zeros(m, m);
    let mut gz = vec![0.0; problem.p()];
    for (j, z) in cols.iter().enumerate() {
        debug_assert_eq!(z.len(), n);
        g.mul_vec_into(z, &mut gz);
        for (i, &r) in rows.iter().enumerate() {
            h.set(i, j, gz[r]);
        }
    }
    // Symmetrize rounding noise.
    for i in 0..m {
        for j in (i + 1)..m {
            let s = 0.5 * (h.get(i, j) + h.get(j, i));
            h.set(i, j, s);
            h.set(j, i, s);
        }
    }
    h
}
