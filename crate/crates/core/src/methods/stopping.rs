use super::config::StopRule;

/// Outcome of one stopping test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopStatus {
    Continue,
    /// Only the dual progress test `|d(x^k) − d(x^{k−1})| ≤ ε²` holds.
    StopDs,
    /// Only the feasibility test `dist_K(G w + g) ≤ ε` holds.
    StopPf,
    StopBoth,
}

impl StopStatus {
    pub fn should_stop(&self, rule: StopRule) -> bool {
        match rule {
            StopRule::Both => *self == StopStatus::StopBoth,
            StopRule::Either => *self != StopStatus::Continue,
            StopRule::Never => false,
        }
    }
}

/// Classifies dual progress `ds` and primal infeasibility `pf` against `ε`.
/// NaN values never pass.
pub fn stopping_check(ds: f64, pf: f64, epsilon: f64) -> StopStatus {
    match (ds <= epsilon * epsilon, pf <= epsilon) {
        (true, true) => StopStatus::StopBoth,
        (true, false) => StopStatus::StopDs,
        (false, true) => StopStatus::StopPf,
        (false, false) => StopStatus::Continue,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifies_both_tests() {
        assert_eq!(stopping_check(1e-5, 1e-3, 1e-2), StopStatus::StopBoth);
        assert_eq!(stopping_check(1e-3, 1e-3, 1e-2), StopStatus::StopPf);
        assert_eq!(stopping_check(1e-5, 1e-1, 1e-2), StopStatus::StopDs);
        assert_eq!(stopping_check(1.0, 1.0, 1e-2), StopStatus::Continue);
        assert_eq!(stopping_check(f64::NAN, 0.0, 1e-2), StopStatus::StopPf);
    }

    #[test]
    fn rules_combine_tests() {
        assert!(StopStatus::StopBoth.should_stop(StopRule::Both));
        assert!(!StopStatus::StopDs.should_stop(StopRule::Both));
        assert!(StopStatus::StopDs.should_stop(StopRule::Either));
        assert!(!StopStatus::StopBoth.should_stop(StopRule::Never));
    }
}
