//! Per-iterate inequalities that the convergence proofs rely on.

use alloc::vec::Vec;

use super::reference::ReferenceSolution;
use crate::error::Result;
use crate::inner::DualOracleResult;
use crate::math::{dist, dot};
use crate::methods::{IterateView, Observer, Phase};
use crate::model::ConicProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lemma {
    /// `d(x^{k+1}) ≥ d(x^k) + (L_d/2)‖x^{k+1} − x^k‖²` for gradient steps.
    Ascent,
    /// `‖∇⁺d(x^{k+1})‖ ≤ ‖∇⁺d(x^k)‖` for steps of length `1/L_d`.
    GradientMapMonotone,
    /// `dist_K(−∇d(x)) ≤ L_d ‖∇⁺d(x)‖`
    InfeasibilityByGradientMap,
    /// `‖x^{k+1}‖² ≤ ‖x^k‖² + 2α_k (f* − f(u^k))`
    NormRecursion,
    /// `‖x^k − x*‖ ≤ ‖x⁰ − x*‖` for gradient iterates.
    FejerDg,
    /// `‖x^k − x*‖ ≤ ‖x⁰ − x*‖` and `‖w^k − x*‖ ≤ ‖x⁰ − x*‖` for fast iterates.
    FejerDfg,
    /// `θ_k²(f* − d(x^k)) + Σ θ_i Δ(x*, y^i) + (L_d/2)‖w^k − x*‖² ≤ (L_d/2)‖x⁰ − x*‖²`
    /// with `Δ(x, y) = d(y) + ⟨∇d(y), x − y⟩ − d(x) ≥ 0`.
    Corr2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaViolation {
    pub lemma: Lemma,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy)]
struct Previous {
    k: usize,
    d: f64,
    gradmap: f64,
    x_norm: f64,
    f_last: f64,
}

/// Observer that checks the per-iterate lemmas against a known optimum.
///
/// An inequality `lhs ≤ rhs` counts as violated when
/// `lhs > rhs + slack · max(1, |rhs|)`. The fast-gradient checks apply to
/// the first (un-restarted) epoch only.
#[derive(Debug, Clone)]
pub struct LemmaMonitor {
    x_star: Vec<f64>,
    f_star: f64,
    slack: f64,
    r0: Option<f64>,
    prev: Option<Previous>,
    corr2_sum: f64,
    checks: usize,
    violations: Vec<LemmaViolation>,
}

impl LemmaMonitor {
    pub fn new(x_star: Vec<f64>, f_star: f64, slack: f64) -> Self {
        LemmaMonitor {
            x_star,
            f_star,
            slack,
            r0: None,
            prev: None,
            corr2_sum: 0.0,
            checks: 0,
            violations: Vec::new(),
        }
    }

    pub fn from_reference(reference: &ReferenceSolution, slack: f64) -> Self {
        Self::new(reference.x_star.clone(), reference.f_star, slack)
    }

    pub fn violations(&self) -> &[LemmaViolation] {
        &self.violations
    }

    /// Number of inequalities evaluated.
    pub fn checks(&self) -> usize {
        self.checks
    }

    fn check(&mut self, lemma: Lemma, k: usize, lhs: f64, rhs: f64) {
        self.checks += 1;
        if lhs > rhs + self.slack * rhs.abs().max(1.0) {
            self.violations.push(LemmaViolation { lemma, k, lhs, rhs });
        }
    }
}

impl Observer for LemmaMonitor {
    fn observe(&mut self, v: &IterateView<'_>) {
        let row = v.row;
        let l = v.l_d;
        if row.k == 0 {
            self.r0 = Some(dist(v.x, &self.x_star));
            self.prev = None;
            self.corr2_sum = 0.0;
        }
        let r0 = self.r0.unwrap_or(f64::INFINITY);
        let xs_dist = dist(v.x, &self.x_star);

        self.check(
            Lemma::InfeasibilityByGradientMap,
            row.k,
            row.infeas_last,
            l * row.gradmap_norm,
        );

        let consecutive = self.prev.filter(|p| p.k + 1 == row.k);
        match row.phase {
            Phase::Dg => {
                self.check(Lemma::FejerDg, row.k, xs_dist, r0);
                if let Some(p) = consecutive {
                    self.check(
                        Lemma::Ascent,
                        row.k,
                        p.d + 0.5 * l * row.step_norm * row.step_norm,
                        row.d,
                    );
                    self.check(
                        Lemma::NormRecursion,
                        row.k,
                        row.x_norm * row.x_norm,
                        p.x_norm * p.x_norm + 2.0 * row.alpha * (self.f_star - p.f_last),
                    );
                    if (row.alpha * l - 1.0).abs() <= 1e-12 {
                        self.check(
                            Lemma::GradientMapMonotone,
                            row.k,
                            row.gradmap_norm,
                            p.gradmap,
                        );
                    }
                }
            }
            Phase::Dfg if row.epoch == 0 => {
                self.check(Lemma::FejerDfg, row.k, xs_dist, r0);
                if let (Some(w), Some(y), Some(d_y), Some(grad_y)) = (v.w, v.y, v.d_y, v.grad_y) {
                    self.check(Lemma::FejerDfg, row.k, dist(w, &self.x_star), r0);
                    let diff: Vec<f64> = self.x_star.iter().zip(y).map(|(a, b)| a - b).collect();
                    // Δ(x*, y) ≥ 0 by concavity; clamp rounding noise.
                    let delta = (d_y + dot(grad_y, &diff) - self.f_star).max(0.0);
                    self.corr2_sum += v.theta * delta;
                    let wd = dist(w, &self.x_star);
                    let lhs = v.theta * v.theta * (self.f_star - row.d)
                        + self.corr2_sum
                        + 0.5 * l * wd * wd;
                    self.check(Lemma::Corr2, row.k, lhs, 0.5 * l * r0 * r0);
                }
            }
            _ => {}
        }
        self.prev = Some(Previous {
            k: row.k,
            d: row.d,
            gradmap: row.gradmap_norm,
            x_norm: row.x_norm,
            f_last: row.f_last,
        });
    }
}

/// The three inequalities that turn dual accuracy at `x` into primal accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationChain {
    /// `f* − d(x)`
    pub dual_gap: f64,
    /// `(σ_f/2) ‖u(x) − u*‖²`
    pub distance_term: f64,
    /// `dist_K(G u(x) + g)`
    pub infeasibility: f64,
    /// `‖G‖ ‖u(x) − u*‖`
    pub infeasibility_bound: f64,
    /// `|f(u(x)) − f*|`
    pub suboptimality: f64,
    /// `‖G‖ (‖x − x*‖ + ‖x*‖) ‖u(x) − u*‖`
    pub suboptimality_bound: f64,
}

impl TranslationChain {
    pub fn evaluate(
        problem: &ConicProblem,
        reference: &ReferenceSolution,
        g_norm: f64,
        x: &[f64],
        at_x: &DualOracleResult,
    ) -> Result<Self> {
        let du = dist(&at_x.u, &reference.u_star);
        let xs = crate::math::norm(&reference.x_star);
        Ok(TranslationChain {
            dual_gap: reference.f_star - at_x.value,
            distance_term: 0.5 * problem.objective().sigma_f() * du * du,
            infeasibility: super::primal_infeasibility(problem, &at_x.u),
            infeasibility_bound: g_norm * du,
            suboptimality: (problem.objective().value(&at_x.u)? - reference.f_star).abs(),
            suboptimality_bound: g_norm * (dist(x, &reference.x_star) + xs) * du,
        })
    }

    /// Whether all three inequalities hold up to `slack · max(1, |rhs|)`.
    pub fn holds(&self, slack: f64) -> bool {
        let ok = |lhs: f64, rhs: f64| lhs <= rhs + slack * rhs.abs().max(1.0);
        ok(self.distance_term, self.dual_gap)
            && ok(self.infeasibility, self.infeasibility_bound)
            && ok(self.suboptimality, self.suboptimality_bound)
    }
}
