mod common;

use common::{brute_force_inner, random_qp};
use conic_dual_core::certify::{reference_solution, TranslationChain};
use conic_dual_core::linalg::spectral_norm;
use conic_dual_core::{Cone, DenseMatrix, DualOracle, InnerOptions, SimpleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dual_point(rng: &mut ChaCha8Rng, cone: &Cone) -> Vec<f64> {
    let v: Vec<f64> = (0..cone.dim())
        .map(|_| rng.random_range(-2.0..2.0))
        .collect();
    cone.project_dual(&v)
}

#[test]
fn oracle_matches_brute_force_and_finite_differences() {
    let cases = [
        (11, Cone::Nonneg(3), SimpleSet::Whole(4)),
        (12, Cone::Zero(2), SimpleSet::Nonneg(3)),
        (
            13,
            Cone::SecondOrder(3),
            SimpleSet::boxed(vec![-1.0; 4], vec![1.0; 4]).unwrap(),
        ),
    ];
    for (seed, cone, set) in cases {
        let n = set.dim();
        let p = random_qp(seed, n, cone.dim(), cone, set);
        let oracle = DualOracle::new(
            &p,
            InnerOptions {
                tol: 1e-12,
                max_iter: 100_000,
            },
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let x = random_dual_point(&mut rng, &cone);
            let r = oracle.evaluate(&x, None).unwrap();
            let (_, d_bf, g_bf) = brute_force_inner(&p, &x);
            assert!((r.value - d_bf).abs() < 1e-6);
            for (a, b) in r.gradient.iter().zip(&g_bf) {
                assert!((a - b).abs() < 1e-6);
            }
            for i in 0..x.len() {
                let h = 1e-6;
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[i] += h;
                xm[i] -= h;
                let fd = (oracle.evaluate(&xp, None).unwrap().value
                    - oracle.evaluate(&xm, None).unwrap().value)
                    / (2.0 * h);
                assert!((fd - r.gradient[i]).abs() < 1e-5, "seed {seed} coord {i}");
            }
        }
    }
}

#[test]
fn translation_chain_holds_at_random_points() {
    for (seed, cone) in [
        (21, Cone::Nonpos(4)),
        (22, Cone::Zero(3)),
        (23, Cone::SecondOrder(4)),
    ] {
        let p = random_qp(seed, 5, cone.dim(), cone, SimpleSet::Whole(5));
        let reference = reference_solution(&p, &vec![0.0; cone.dim()]).unwrap();
        let g_norm = spectral_norm(p.constraint_matrix()).unwrap();
        let oracle = DualOracle::new(&p, InnerOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let x = random_dual_point(&mut rng, &cone);
            let r = oracle.evaluate(&x, None).unwrap();
            let chain = TranslationChain::evaluate(&p, &reference, g_norm, &x, &r).unwrap();
            assert!(chain.holds(1e-7), "{cone:?}: {chain:?}");
        }
    }
}

#[test]
fn spectral_norm_matches_dense_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..7)
        .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let m = DenseMatrix::from_rows(&rows).unwrap();
    let ours = spectral_norm(&m.clone().into()).unwrap();
    let na = nalgebra::DMatrix::from_row_slice(7, 5, m.data());
    let svd = na.singular_values().max();
    assert!((ours - svd).abs() < 1e-8 * svd);
}

#[test]
fn jacobi_matches_dense_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 8;
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let (vals, _) = conic_dual_core::linalg::symmetric_eigen(&a).unwrap();
    let na = nalgebra::DMatrix::from_row_slice(n, n, a.data());
    let mut expect: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
    expect.sort_by(f64::total_cmp);
    for (x, y) in vals.iter().zip(&expect) {
        assert!((x - y).abs() < 1e-12);
    }
}
