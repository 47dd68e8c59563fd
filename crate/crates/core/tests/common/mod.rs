#![allow(dead_code)]

use conic_dual_core::{Cone, ConicProblem, DenseMatrix, Matrix, ObjectiveOracle, SimpleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn toy_equality() -> ConicProblem {
    let f = ObjectiveOracle::quadratic(DenseMatrix::identity(2).into(), vec![0.0, 0.0]).unwrap();
    let g: Matrix = DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap().into();
    ConicProblem::new(f, g, vec![-1.0], Cone::Zero(1), SimpleSet::Whole(2)).unwrap()
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller keeps the test helper free of extra dependencies.
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Random strongly convex QP `min ½uᵀQu + qᵀu s.t. Gu + g ∈ K, u ∈ U`
/// with a strictly feasible point.
pub fn random_qp(seed: u64, n: usize, p: usize, cone: Cone, set: SimpleSet) -> ConicProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![vec![0.0; n]; n];
    for row in d.iter_mut() {
        for v in row.iter_mut() {
            *v = gauss(&mut rng) / (n as f64).sqrt();
        }
    }
    let mut q = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = if i == j { 0.5 } else { 0.0 };
            for row in &d {
                s += row[i] * row[j];
            }
            q.set(i, j, s);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (q.get(i, j) + q.get(j, i));
            q.set(i, j, s);
            q.set(j, i, s);
        }
    }
    let lin: Vec<f64> = (0..n).map(|_| 2.0 * gauss(&mut rng)).collect();
    let gm: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| gauss(&mut rng)).collect())
        .collect();
    let u_hat: Vec<f64> = match &set {
        SimpleSet::Whole(_) => (0..n).map(|_| 0.3 * gauss(&mut rng)).collect(),
        SimpleSet::Nonneg(_) => (0..n).map(|_| rng.random_range(0.1..0.5)).collect(),
        SimpleSet::Box { lower, upper } => lower
            .iter()
            .zip(upper)
            .map(|(l, h)| {
                let lo = if l.is_finite() { *l } else { -1.0 };
                let hi = if h.is_finite() { *h } else { 1.0 };
                lo + (hi - lo) * rng.random_range(0.3..0.7)
            })
            .collect(),
    };
    let g: Vec<f64> = gm
        .iter()
        .map(|row| {
            let gu: f64 = row.iter().zip(&u_hat).map(|(a, b)| a * b).sum();
            let slack: f64 = rng.random_range(0.1..1.0);
            match cone {
                Cone::Zero(_) => -gu,
                Cone::Nonneg(_) => slack - gu,
                Cone::Nonpos(_) => -slack - gu,
                Cone::SecondOrder(_) => -gu,
            }
        })
        .collect();
    let mut g = g;
    if let Cone::SecondOrder(_) = cone {
        // Shift the first entry so that G û + g sits well inside the cone.
        g[0] += 1.0 + p as f64;
    }
    let f = ObjectiveOracle::quadratic(q.into(), lin).unwrap();
    let gmat = DenseMatrix::from_rows(&gm).unwrap().into();
    ConicProblem::new(f, gmat, g, cone, set).unwrap()
}

/// Plain projected gradient on the inner problem, run far past convergence.
pub fn brute_force_inner(problem: &ConicProblem, x: &[f64]) -> (Vec<f64>, f64, Vec<f64>) {
    let obj = problem.objective();
    let gtx = problem.constraint_matrix().mul_t_vec(x);
    let l = obj.gradient_lipschitz() * 1.01;
    let mut u = problem.set().project(&vec![0.0; problem.n()]);
    for _ in 0..200_000 {
        let grad = obj.gradient(&u).unwrap();
        let mut next: Vec<f64> = u
            .iter()
            .zip(&grad)
            .zip(&gtx)
            .map(|((ui, gi), ci)| ui - (gi - ci) / l)
            .collect();
        problem.set().project_in_place(&mut next);
        let step: f64 = next
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        u = next;
        if step * l < 1e-13 {
            break;
        }
    }
    let s = problem.constraint_value(&u);
    let value = obj.value(&u).unwrap() - x.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>();
    let grad = s.iter().map(|v| -v).collect();
    (u, value, grad)
}
