//! Closed-form convergence envelopes.

use alloc::format;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::math::{ln, powf, powi, sqrt};

/// Named convergence envelope. Each family maps an iteration index `k` and
/// problem constants to an upper bound on one trace metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundFamily {
    /// `f* − d(x^k) ≤ 4 L_G R_d² / k`
    DgDualGap,
    /// `dist_K(Gu^k + g) ≤ 3 L_G R_d / √k`
    DgLastInfeas,
    /// `|f(u^k) − f*| ≤ (6R_d + 3‖x⁰‖) L_G R_d / √k`
    DgLastSubopt,
    /// `dist_K(Gû^k + g) ≤ 2 L_G R_d / (k+1)`
    DgAvgInfeas,
    /// `f* − f(û^k) ≤ 2 L_G R_d (R_d + ‖x⁰‖) / (k+1)`
    DgAvgSuboptLower,
    /// `f(û^k) − f* ≤ L_G ‖x⁰‖² / (2(k+1))`
    DgAvgSuboptUpper,
    /// `‖û^k − u*‖² ≤ [L_G‖x⁰‖² + 4 L_G R_d (R_d + ‖x⁰‖)] / (σ_f (k+1))`
    DgAvgDistance,
    /// `f* − d(x^k) ≤ 2 L_d R_d² / (k+1)²`
    DfgDualGap,
    /// `dist_K(Gv^k + g) ≤ 2 L_d R_d / (k+1)`
    DfgLastInfeas,
    /// `|f(v^k) − f*| ≤ (2R_d + ‖x⁰‖) 2 L_d R_d / (k+1)`
    DfgLastSubopt,
    /// `dist_K(Gû^k + g) ≤ 8 L_d R_d / (k+1)²`, `k ≥ 1`
    DfgAvgInfeas,
    /// `|f(û^k) − f*| ≤ 8 L_d [R_d² + max(R_d, ‖x⁰‖)²] / (k+1)²`, `k ≥ 1`
    DfgAvgSubopt,
    /// `‖x^k − x̄^k‖ ≤ (κ/√(1+κ²))^k R_d` under an error bound
    EbDgDistance,
    /// `f* − d(x^k) ≤ (L_d R_d²/2) (κ²/(1+κ²))^{k−1}` under an error bound
    EbDgGap,
    /// Iteration budget `e κ log(L_d R_d² / ε)` of the restarted method
    RdfgBudget,
    /// `‖Gu^{2k} + g‖ ≤ 3 L_d R_d / k` for equality constraints
    Lin2kDgInfeas,
    /// `|f(u^{2k}) − f*| ≤ (2R_d + ‖x⁰‖) 3 L_d R_d / k`
    Lin2kDgSubopt,
    /// `‖Gu^{2k} + g‖ ≤ 2 L_d R_d / (k+1)^{3/2}` after the hybrid
    LinHybridInfeas,
    /// `|f(u^{2k}) − f*| ≤ (2R_d + ‖x⁰‖) 2 L_d R_d / (k+1)^{3/2}`
    LinHybridSubopt,
    /// `dist_K(Gu^{2k} + g) ≤ 3 L_d R_d / k`
    Cone2kDgInfeas,
    /// `f* − f(u^{2k}) ≤ 3 L_d R_d (R_d + ‖x⁰‖) / k`
    Cone2kDgSuboptLower,
    /// `f(u^{2k}) − f* ≤ 2 L_d R_d (2R_d + ‖x⁰‖) / √k`
    Cone2kDgSuboptUpper,
    /// `dist_K(Gu^{2k} + g) ≤ 2 L_d R_d / (k+1)^{3/2}` after the hybrid
    ConeHybridInfeas,
    /// `f* − f(u^{2k}) ≤ 2 L_d (R_d² + R_d‖x⁰‖) / (k+1)^{3/2}`
    ConeHybridSuboptLower,
    /// `f(u^{2k}) − f* ≤ (2R_d + ‖x⁰‖) 3 L_d R_d / (k+1)`
    ConeHybridSuboptUpper,
    /// `dist_K(Gu(x^k) + g) ≤ 4ε(√(L_d³) + 1/R_d)` after the budget
    RegDfgInfeas,
    /// Budget `2√((L_d+δ)/δ) log(R_d √(2(L_d+2δ)) / ε)` of the regularized method
    RegDfgBudget,
}

impl BoundFamily {
    pub const ALL: [BoundFamily; 27] = [
        BoundFamily::DgDualGap,
        BoundFamily::DgLastInfeas,
        BoundFamily::DgLastSubopt,
        BoundFamily::DgAvgInfeas,
        BoundFamily::DgAvgSuboptLower,
        BoundFamily::DgAvgSuboptUpper,
        BoundFamily::DgAvgDistance,
        BoundFamily::DfgDualGap,
        BoundFamily::DfgLastInfeas,
        BoundFamily::DfgLastSubopt,
        BoundFamily::DfgAvgInfeas,
        BoundFamily::DfgAvgSubopt,
        BoundFamily::EbDgDistance,
        BoundFamily::EbDgGap,
        BoundFamily::RdfgBudget,
        BoundFamily::Lin2kDgInfeas,
        BoundFamily::Lin2kDgSubopt,
        BoundFamily::LinHybridInfeas,
        BoundFamily::LinHybridSubopt,
        BoundFamily::Cone2kDgInfeas,
        BoundFamily::Cone2kDgSuboptLower,
        BoundFamily::Cone2kDgSuboptUpper,
        BoundFamily::ConeHybridInfeas,
        BoundFamily::ConeHybridSuboptLower,
        BoundFamily::ConeHybridSuboptUpper,
        BoundFamily::RegDfgInfeas,
        BoundFamily::RegDfgBudget,
    ];

    pub fn name(&self) -> &'static str {
        use BoundFamily::*;
        match self {
            DgDualGap => "DG-dual-gap",
            DgLastInfeas => "DG-last-infeas",
            DgLastSubopt => "DG-last-subopt",
            DgAvgInfeas => "DG-avg-infeas",
            DgAvgSuboptLower => "DG-avg-subopt-lower",
            DgAvgSuboptUpper => "DG-avg-subopt-upper",
            DgAvgDistance => "DG-avg-distance",
            DfgDualGap => "DFG-dual-gap",
            DfgLastInfeas => "DFG-last-infeas",
            DfgLastSubopt => "DFG-last-subopt",
            DfgAvgInfeas => "DFG-avg-infeas",
            DfgAvgSubopt => "DFG-avg-subopt",
            EbDgDistance => "EB-DG-distance",
            EbDgGap => "EB-DG-gap",
            RdfgBudget => "RDFG-budget",
            Lin2kDgInfeas => "Lin-2kDG-infeas",
            Lin2kDgSubopt => "Lin-2kDG-subopt",
            LinHybridInfeas => "Lin-hybrid-infeas",
            LinHybridSubopt => "Lin-hybrid-subopt",
            Cone2kDgInfeas => "Cone-2kDG-infeas",
            Cone2kDgSuboptLower => "Cone-2kDG-subopt-lower",
            Cone2kDgSuboptUpper => "Cone-2kDG-subopt-upper",
            ConeHybridInfeas => "Cone-hybrid-infeas",
            ConeHybridSuboptLower => "Cone-hybrid-subopt-lower",
            ConeHybridSuboptUpper => "Cone-hybrid-subopt-upper",
            RegDfgInfeas => "RegDFG-infeas",
            RegDfgBudget => "RegDFG-budget",
        }
    }

    /// Smallest `k` at which the bound is defined.
    pub fn min_k(&self) -> usize {
        use BoundFamily::*;
        match self {
            DgDualGap | DgLastInfeas | DgLastSubopt | DfgAvgInfeas | DfgAvgSubopt | EbDgGap
            | Lin2kDgInfeas | Lin2kDgSubopt | Cone2kDgInfeas | Cone2kDgSuboptLower
            | Cone2kDgSuboptUpper => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for BoundFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundFamily::ALL
            .iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown bound family '{s}'")))
    }
}

/// Constants entering the envelopes. Optional entries are only needed by
/// the families that use them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub l_d: f64,
    /// Inverse of the smallest dual step; equals `l_d` for `α = 1/L_d`.
    pub l_g: f64,
    pub r_d: f64,
    pub x0_norm: f64,
    pub sigma_f: f64,
    pub kappa: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    /// Split index of a hybrid run.
    pub hybrid_split: Option<usize>,
}

impl BoundConstants {
    pub fn new(l_d: f64, r_d: f64, x0_norm: f64, sigma_f: f64) -> Self {
        BoundConstants {
            l_d,
            l_g: l_d,
            r_d,
            x0_norm,
            sigma_f,
            kappa: None,
            delta: None,
            epsilon: None,
            hybrid_split: None,
        }
    }
}

fn need(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("bound needs {what}")))
}

/// Evaluates the envelope of `family` at iteration `k`.
pub fn theoretical_bound(family: BoundFamily, k: usize, c: &BoundConstants) -> Result<f64> {
    use BoundFamily::*;
    if k < family.min_k() {
        return Err(Error::Config(format!(
            "{family} is defined for k >= {}",
            family.min_k()
        )));
    }
    let kf = k as f64;
    let k1 = kf + 1.0;
    let (l, lg, r, x0) = (c.l_d, c.l_g, c.r_d, c.x0_norm);
    let v = match family {
        DgDualGap => 4.0 * lg * r * r / kf,
        DgLastInfeas => 3.0 * lg * r / sqrt(kf),
        DgLastSubopt => (6.0 * r + 3.0 * x0) * lg * r / sqrt(kf),
        DgAvgInfeas => 2.0 * lg * r / k1,
        DgAvgSuboptLower => 2.0 * lg * r * (r + x0) / k1,
        DgAvgSuboptUpper => lg * x0 * x0 / (2.0 * k1),
        DgAvgDistance => (lg * x0 * x0 / c.sigma_f + 4.0 * lg * r * (r + x0) / c.sigma_f) / k1,
        DfgDualGap => 2.0 * l * r * r / (k1 * k1),
        DfgLastInfeas => 2.0 * l * r / k1,
        DfgLastSubopt => (2.0 * r + x0) * 2.0 * l * r / k1,
        DfgAvgInfeas => 8.0 * l * r / (k1 * k1),
        DfgAvgSubopt => {
            let m = r.max(x0);
            8.0 * l * (r * r + m * m) / (k1 * k1)
        }
        EbDgDistance => {
            let kappa = need(c.kappa, "kappa")?;
            powi(kappa / sqrt(1.0 + kappa * kappa), k as i32) * r
        }
        EbDgGap => {
            let kappa = need(c.kappa, "kappa")?;
            let q = kappa * kappa / (1.0 + kappa * kappa);
            0.5 * l * r * r * powf(q, kf - 1.0)
        }
        RdfgBudget => {
            let kappa = need(c.kappa, "kappa")?;
            let eps = need(c.epsilon, "epsilon")?;
            core::f64::consts::E * kappa * ln(l * r * r / eps)
        }
        Lin2kDgInfeas | Cone2kDgInfeas => 3.0 * l * r / kf,
        Lin2kDgSubopt => (2.0 * r + x0) * 3.0 * l * r / kf,
        LinHybridInfeas | ConeHybridInfeas => 2.0 * l * r / powf(k1, 1.5),
        LinHybridSubopt => (2.0 * r + x0) * 2.0 * l * r / powf(k1, 1.5),
        Cone2kDgSuboptLower => 3.0 * l * r * (r + x0) / kf,
        Cone2kDgSuboptUpper => 2.0 * l * r * (2.0 * r + x0) / sqrt(kf),
        ConeHybridSuboptLower => 2.0 * l * (r * r + r * x0) / powf(k1, 1.5),
        ConeHybridSuboptUpper => (2.0 * r + x0) * 3.0 * l * r / k1,
        RegDfgInfeas => {
            let eps = need(c.epsilon, "epsilon")?;
            4.0 * eps * (sqrt(l * l * l) + 1.0 / r)
        }
        RegDfgBudget => {
            let eps = need(c.epsilon, "epsilon")?;
            let delta = need(c.delta, "delta")?;
            2.0 * sqrt((l + delta) / delta) * ln(r * sqrt(2.0 * (l + 2.0 * delta)) / eps)
        }
    };
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_values() {
        let mut c = BoundConstants::new(2.0, 0.5, 0.0, 1.0);
        assert!((theoretical_bound(BoundFamily::DgDualGap, 4, &c).unwrap() - 0.5).abs() < 1e-15);
        assert!((theoretical_bound(BoundFamily::DfgAvgInfeas, 3, &c).unwrap() - 0.5).abs() < 1e-15);
        c = BoundConstants::new(1.0, 1.0, 0.0, 1.0);
        c.kappa = Some(1.0);
        assert!((theoretical_bound(BoundFamily::EbDgDistance, 2, &c).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn domain_and_missing_constants() {
        let c = BoundConstants::new(2.0, 0.5, 0.0, 1.0);
        assert!(theoretical_bound(BoundFamily::DgDualGap, 0, &c).is_err());
        assert!(theoretical_bound(BoundFamily::DfgDualGap, 0, &c).is_ok());
        assert!(theoretical_bound(BoundFamily::EbDgGap, 3, &c).is_err());
        assert!(theoretical_bound(BoundFamily::RegDfgInfeas, 3, &c).is_err());
    }

    #[test]
    fn names_round_trip() {
        for f in BoundFamily::ALL {
            assert_eq!(f.name().parse::<BoundFamily>().unwrap(), f);
        }
    }
}
