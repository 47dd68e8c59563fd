//! High-accuracy reference solutions `(u*, x*, f*)` used to measure suboptimality.

use alloc::vec;
use alloc::vec::Vec;

use crate::cones::Cone;
use crate::error::{check_len, Error, Result};
use crate::inner::{dual_ascent_step, schur_complement, DualOracle, InnerOptions};
use crate::linalg::{pinv_apply, symmetric_eigen, Cholesky};
use crate::math::{dist, dot, norm};
use crate::methods::theta_next;
use crate::model::{ConicProblem, SimpleSet};

/// Largest dimension handled by the dense closed-form routes.
const DENSE_LIMIT: usize = 2000;
const MAX_ITERATIVE: usize = 200_000;

/// How a reference solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    /// Exact KKT solve of an equality-constrained quadratic program.
    ClosedForm,
    /// Long accelerated dual run followed by an exact solve on the active set.
    ActiveSet,
    /// Long accelerated dual run only.
    Iterative,
}

/// Residuals of the optimality conditions at `(u, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// `‖u − Π_U(u − ∇f(u) + Gᵀx)‖`
    pub stationarity: f64,
    /// `dist_K(Gu + g)`
    pub primal: f64,
    /// `dist_{K*}(x)`
    pub dual: f64,
    /// `|⟨x, Gu + g⟩|`
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub u_star: Vec<f64>,
    /// Optimal multiplier closest to the starting point `x⁰`.
    pub x_star: Vec<f64>,
    pub f_star: f64,
    /// `R_d = ‖x⁰ − x*‖`
    pub r_d: f64,
    pub source: ReferenceSource,
    pub kkt: KktResiduals,
}

pub fn kkt_residuals(problem: &ConicProblem, u: &[f64], x: &[f64]) -> Result<KktResiduals> {
    check_len("primal point", problem.n(), u.len())?;
    check_len("dual point", problem.p(), x.len())?;
    let gtx = problem.constraint_matrix().mul_t_vec(x);
    let mut step = problem.objective().gradient(u)?;
    for ((s, ui), c) in step.iter_mut().zip(u).zip(&gtx) {
        *s = ui - (*s - c);
    }
    problem.set().project_in_place(&mut step);
    let s = problem.constraint_value(u);
    Ok(KktResiduals {
        stationarity: dist(u, &step),
        primal: problem.cone().distance(&s),
        dual: problem.cone().dual_distance(x),
        complementarity: dot(x, &s).abs(),
    })
}

/// Computes `(u*, x*, f*)` with `x*` the optimal multiplier nearest `x0`.
///
/// Equality-constrained quadratic programs on the whole space are solved in
/// closed form. Everything else goes through a long restarted accelerated
/// dual run, followed for quadratic programs with polyhedral cones by an
/// exact solve on the detected active set.
pub fn reference_solution(problem: &ConicProblem, x0: &[f64]) -> Result<ReferenceSolution> {
    check_len("x0", problem.p(), x0.len())?;
    let quad_whole = problem.objective().is_quadratic()
        && matches!(problem.set(), SimpleSet::Whole(_))
        && problem.n() <= DENSE_LIMIT
        && problem.p() <= DENSE_LIMIT;
    let chol = if quad_whole {
        Some(Cholesky::factor(&problem.objective().hessian().to_dense())?)
    } else {
        None
    };

    if let (Some(chol), Cone::Zero(p)) = (&chol, problem.cone()) {
        let rows: Vec<usize> = (0..*p).collect();
        let x_star = equality_multiplier(problem, chol, &rows, x0)?.ok_or_else(|| {
            Error::Infeasible("linear equality constraints are inconsistent".into())
        })?;
        return finish(
            problem,
            chol_primal(problem, chol, &x_star),
            x_star,
            x0,
            ReferenceSource::ClosedForm,
        );
    }

    let (x_hat, u_hat) = accelerated_dual(problem, x0)?;
    if let Some(chol) = &chol {
        if problem.cone().is_polyhedral() {
            if let Some((x, u)) = polish(problem, chol, &x_hat, &u_hat, x0)? {
                return finish(problem, u, x, x0, ReferenceSource::ActiveSet);
            }
        }
    }
    finish(problem, u_hat, x_hat, x0, ReferenceSource::Iterative)
}

fn finish(
    problem: &ConicProblem,
    u_star: Vec<f64>,
    x_star: Vec<f64>,
    x0: &[f64],
    source: ReferenceSource,
) -> Result<ReferenceSolution> {
    let kkt = kkt_residuals(problem, &u_star, &x_star)?;
    Ok(ReferenceSolution {
        f_star: problem.objective().value(&u_star)?,
        r_d: dist(x0, &x_star),
        u_star,
        x_star,
        source,
        kkt,
    })
}

/// `u = Q⁻¹(Gᵀx − q)`
fn chol_primal(problem: &ConicProblem, chol: &Cholesky, x: &[f64]) -> Vec<f64> {
    let mut rhs = problem.constraint_matrix().mul_t_vec(x);
    for (r, q) in rhs.iter_mut().zip(problem.objective().linear()) {
        *r -= q;
    }
    chol.solve_in_place(&mut rhs);
    rhs
}

/// Multiplier of `min f(u) s.t. (Gu + g)_i = 0 for i ∈ rows`, with the
/// remaining entries zero and the free part projected from `x0`.
/// Returns `None` when the restricted system is inconsistent.
fn equality_multiplier(
    problem: &ConicProblem,
    chol: &Cholesky,
    rows: &[usize],
    x0: &[f64],
) -> Result<Option<Vec<f64>>> {
    let p = problem.p();
    let mut x = vec![0.0; p];
    if rows.is_empty() {
        return Ok(Some(x));
    }
    let h = schur_complement(problem, chol, rows);
    // b = (G Q⁻¹ q − g) restricted to rows
    let qinv_q = chol.solve(problem.objective().linear());
    let gq = problem.constraint_matrix().mul_vec(&qinv_q);
    let b: Vec<f64> = rows
        .iter()
        .map(|&i| gq[i] - problem.constraint_offset()[i])
        .collect();
    let x0s: Vec<f64> = rows.iter().map(|&i| x0[i]).collect();
    let mut hx0 = vec![0.0; rows.len()];
    h.mul_vec_into(&x0s, &mut hx0);
    let resid0: Vec<f64> = b.iter().zip(&hx0).map(|(a, c)| a - c).collect();
    let (vals, vecs) = symmetric_eigen(&h)?;
    let shift = pinv_apply(&vals, &vecs, &resid0, 1e-12);
    let xs: Vec<f64> = x0s.iter().zip(&shift).map(|(a, s)| a + s).collect();
    let mut hx = vec![0.0; rows.len()];
    h.mul_vec_into(&xs, &mut hx);
    let err = dist(&hx, &b);
    if err > 1e-8 * norm(&b).max(1.0) {
        return Ok(None);
    }
    for (&i, v) in rows.iter().zip(&xs) {
        x[i] = *v;
    }
    Ok(Some(x))
}

/// Solves exactly on the active set suggested by `(x_hat, u_hat)` and
/// accepts the result only if it satisfies the full KKT conditions.
fn polish(
    problem: &ConicProblem,
    chol: &Cholesky,
    x_hat: &[f64],
    u_hat: &[f64],
    x0: &[f64],
) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let s = problem.constraint_value(u_hat);
    let x_scale = crate::math::max_abs(x_hat).max(1.0);
    let s_scale = crate::math::max_abs(&s).max(1.0);
    let support: Vec<usize> = (0..problem.p())
        .filter(|&i| x_hat[i].abs() > 1e-9 * x_scale)
        .collect();
    let tight: Vec<usize> = (0..problem.p())
        .filter(|&i| x_hat[i].abs() > 1e-9 * x_scale || s[i].abs() <= 1e-7 * s_scale)
        .collect();
    let base = kkt_residuals(problem, u_hat, x_hat)?.max();
    for rows in [support, tight] {
        let Some(x) = equality_multiplier(problem, chol, &rows, x0)? else {
            continue;
        };
        let u = chol_primal(problem, chol, &x);
        let kkt = kkt_residuals(problem, &u, &x)?;
        let scale = norm(&x).max(1.0) * norm(&u).max(1.0);
        if kkt.max() <= 1e-10 * scale || kkt.max() <= base {
            return Ok(Some((x, u)));
        }
    }
    Ok(None)
}

/// Accelerated projected dual ascent with gradient-based restarts, run to a
/// gradient map below `1e-12 · max(1, ‖x‖)`.
fn accelerated_dual(problem: &ConicProblem, x0: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let oracle = DualOracle::new(
        problem,
        InnerOptions {
            tol: 1e-13,
            max_iter: 200_000,
        },
    )?;
    let l_d = problem.lipschitz_dual_constant()?;
    if !(l_d > 0.0) {
        let r = oracle.evaluate(x0, None)?;
        return Ok((x0.to_vec(), r.u));
    }
    let cone = *problem.cone();
    let mut x = cone.project_dual(x0);
    let mut y = x.clone();
    let mut theta = 1.0;
    let mut at_y = oracle.evaluate(&y, None)?;
    let mut best = (f64::INFINITY, x.clone(), at_y.u.clone());
    for it in 0..MAX_ITERATIVE {
        let x_new = dual_ascent_step(&cone, &y, &at_y.gradient, 1.0 / l_d);
        if it % 10 == 0 || it + 1 == MAX_ITERATIVE {
            let at_x = oracle.evaluate(&x_new, Some(&at_y.u))?;
            let gm = dist(
                &dual_ascent_step(&cone, &x_new, &at_x.gradient, 1.0 / l_d),
                &x_new,
            );
            if gm < best.0 {
                best = (gm, x_new.clone(), at_x.u.clone());
            }
            if gm <= 1e-12 * norm(&x_new).max(1.0) {
                break;
            }
        }
        let mut agree = 0.0;
        for i in 0..x.len() {
            agree += (y[i] - x_new[i]) * (x_new[i] - x[i]);
        }
        if agree > 0.0 {
            theta = 1.0;
            y = x_new.clone();
        } else {
            let t_new = theta_next(theta);
            let beta = (theta - 1.0) / t_new;
            y = x_new
                .iter()
                .zip(&x)
                .map(|(a, b)| a + beta * (a - b))
                .collect();
            theta = t_new;
        }
        x = x_new;
        at_y = oracle.evaluate(&y, Some(&at_y.u))?;
    }
    Ok((best.1, best.2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::model::ObjectiveOracle;

    fn toy(cone: Cone, g: f64) -> ConicProblem {
        let f =
            ObjectiveOracle::quadratic(DenseMatrix::identity(2).into(), vec![0.0, 0.0]).unwrap();
        let gm = DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap().into();
        ConicProblem::new(f, gm, vec![g], cone, SimpleSet::Whole(2)).unwrap()
    }

    #[test]
    fn toy_equality_reference() {
        let r = reference_solution(&toy(Cone::Zero(1), -1.0), &[0.0]).unwrap();
        assert_eq!(r.source, ReferenceSource::ClosedForm);
        assert!((r.x_star[0] - 0.5).abs() < 1e-14);
        assert!((r.f_star - 0.25).abs() < 1e-14);
        assert!((r.r_d - 0.5).abs() < 1e-14);
        assert!(r.kkt.max() < 1e-12);
    }

    #[test]
    fn inequality_reference_uses_active_set() {
        // u1 + u2 - 1 >= 0 is active at (0.5, 0.5).
        let r = reference_solution(&toy(Cone::Nonneg(1), -1.0), &[0.0]).unwrap();
        assert_eq!(r.source, ReferenceSource::ActiveSet);
        assert!((r.x_star[0] - 0.5).abs() < 1e-12);
        assert!((r.f_star - 0.25).abs() < 1e-12);
        // u1 + u2 + 1 >= 0 is inactive at 0.
        let r = reference_solution(&toy(Cone::Nonneg(1), 1.0), &[0.0]).unwrap();
        assert!(r.x_star[0].abs() < 1e-12 && r.f_star.abs() < 1e-12);
    }

    #[test]
    fn inconsistent_equalities_are_reported() {
        let f =
            ObjectiveOracle::quadratic(DenseMatrix::identity(2).into(), vec![0.0, 0.0]).unwrap();
        let gm = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]])
            .unwrap()
            .into();
        let p =
            ConicProblem::new(f, gm, vec![-1.0, -2.0], Cone::Zero(2), SimpleSet::Whole(2)).unwrap();
        assert!(matches!(
            reference_solution(&p, &[0.0, 0.0]),
            Err(Error::Infeasible(_))
        ));
    }
}
