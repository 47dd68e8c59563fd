//! Reference solutions, convergence envelopes, rate fits and lemma checks.

mod bounds;
mod envelope;
mod lemmas;
mod rate;
mod reference;

pub use bounds::{theoretical_bound, BoundConstants, BoundFamily};
pub use envelope::{check_envelope, BoundEnvelope, EnvelopePoint, Slack};
pub use lemmas::{Lemma, LemmaMonitor, LemmaViolation, TranslationChain};
pub use rate::{empirical_rate_exponent, linear_fit, RateFit};
pub use reference::{
    kkt_residuals, reference_solution, KktResiduals, ReferenceSolution, ReferenceSource,
};

use crate::error::Result;
use crate::model::ConicProblem;

/// `dist_K(Gu + g)`
pub fn primal_infeasibility(problem: &ConicProblem, u: &[f64]) -> f64 {
    problem.cone().distance(&problem.constraint_value(u))
}

/// `f(u) − f*`
pub fn primal_suboptimality(problem: &ConicProblem, u: &[f64], f_star: f64) -> Result<f64> {
    Ok(problem.objective().value(u)? - f_star)
}
