//! Least-squares rate estimates from `(k, value)` series.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{ceil, ln};

/// Fits of `log value` against `log k` (sublinear) and against `k` (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Slope of `log value` vs `log k`.
    pub exponent: f64,
    pub r_squared: f64,
    /// Slope of `log value` vs `k`; `log q` for a geometric rate `q^k`.
    pub linear_slope: f64,
    pub linear_r_squared: f64,
    /// Points used after dropping the head and non-positive entries.
    pub points: usize,
    /// Non-positive values (or `k ≤ 0`) dropped from the tail.
    pub excluded: usize,
}

/// Slope, intercept and `r²` of an ordinary least-squares line.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if syy > 0.0 && sxx > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        1.0
    };
    (slope, my - slope * mx, r2)
}

/// Fits the last `tail_fraction` of `series` (pairs `(k, value)`).
///
/// Non-positive values cannot be logged; they are dropped and counted in
/// [`RateFit::excluded`]. At least five usable points are required.
pub fn empirical_rate_exponent(series: &[(f64, f64)], tail_fraction: f64) -> Result<RateFit> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::Config("tail fraction must lie in (0, 1]".into()));
    }
    let take = (ceil(series.len() as f64 * tail_fraction) as usize).min(series.len());
    let tail = &series[series.len() - take..];
    let usable: Vec<(f64, f64)> = tail
        .iter()
        .copied()
        .filter(|(k, v)| *k > 0.0 && *v > 0.0 && v.is_finite())
        .collect();
    let excluded = tail.len() - usable.len();
    if usable.len() < 5 {
        return Err(Error::InvalidData(alloc::format!(
            "rate fit needs at least 5 positive points, got {}",
            usable.len()
        )));
    }
    let ks: Vec<f64> = usable.iter().map(|p| p.0).collect();
    let lk: Vec<f64> = ks.iter().map(|k| ln(*k)).collect();
    let lv: Vec<f64> = usable.iter().map(|p| ln(p.1)).collect();
    let (exponent, _, r_squared) = linear_fit(&lk, &lv);
    let (linear_slope, _, linear_r_squared) = linear_fit(&ks, &lv);
    Ok(RateFit {
        exponent,
        r_squared,
        linear_slope,
        linear_r_squared,
        points: usable.len(),
        excluded,
    })
}
