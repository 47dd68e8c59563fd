use alloc::vec;
use alloc::vec::Vec;

/// Streaming weighted average `Σ w_j u^j / Σ w_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAverage {
    avg: Vec<f64>,
    total: f64,
}

impl WeightedAverage {
    pub fn new(n: usize) -> Self {
        WeightedAverage {
            avg: vec![0.0; n],
            total: 0.0,
        }
    }

    /// Adds `u` with weight `w ≥ 0`.
    pub fn push(&mut self, u: &[f64], w: f64) {
        debug_assert!(w >= 0.0);
        let total = self.total + w;
        if total <= 0.0 {
            return;
        }
        let keep = self.total / total;
        let add = w / total;
        for (a, x) in self.avg.iter_mut().zip(u) {
            *a = keep * *a + add * x;
        }
        self.total = total;
    }

    /// The average, or `None` while all weights are zero.
    pub fn get(&self) -> Option<&[f64]> {
        (self.total > 0.0).then_some(self.avg.as_slice())
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn reset(&mut self) {
        self.avg.iter_mut().for_each(|a| *a = 0.0);
        self.total = 0.0;
    }
}

/// One streaming update: returns the new average and weight sum.
pub fn update_weighted_average(avg: &[f64], total: f64, u: &[f64], weight: f64) -> (Vec<f64>, f64) {
    let mut acc = WeightedAverage {
        avg: avg.to_vec(),
        total,
    };
    acc.push(u, weight);
    (acc.avg, acc.total)
}

/// `θ_{k+1} = (1 + √(1 + 4θ_k²)) / 2`
pub fn theta_next(theta: f64) -> f64 {
    0.5 * (1.0 + crate::math::sqrt(1.0 + 4.0 * theta * theta))
}
