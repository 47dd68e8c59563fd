//! Closed convex cones with Euclidean projections onto the cone and its dual.

use alloc::vec::Vec;

use crate::math::{norm, sqrt};

/// Supported cones. Each is self-dual except the zero cone, whose dual is
/// the whole space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// `{0}`; equality constraints.
    Zero(usize),
    /// Nonnegative orthant.
    Nonneg(usize),
    /// Nonpositive orthant.
    Nonpos(usize),
    /// Second-order cone `{(t, z) : ‖z‖ ≤ t}`.
    SecondOrder(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Zero(p) | Cone::Nonneg(p) | Cone::Nonpos(p) | Cone::SecondOrder(p) => p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Cone::Zero(_) => "zero",
            Cone::Nonneg(_) => "nonneg",
            Cone::Nonpos(_) => "nonpos",
            Cone::SecondOrder(_) => "soc",
        }
    }

    pub fn is_polyhedral(&self) -> bool {
        !matches!(self, Cone::SecondOrder(_))
    }

    /// Projects `v` onto `K` in place.
    pub fn project_in_place(&self, v: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        match self {
            Cone::Zero(_) => v.iter_mut().for_each(|x| *x = 0.0),
            Cone::Nonneg(_) => v.iter_mut().for_each(|x| *x = x.max(0.0)),
            Cone::Nonpos(_) => v.iter_mut().for_each(|x| *x = x.min(0.0)),
            Cone::SecondOrder(_) => project_soc(v),
        }
    }

    /// Projects `v` onto the dual cone `K*` in place.
    pub fn project_dual_in_place(&self, v: &mut [f64]) {
        match self {
            Cone::Zero(_) => {}
            _ => self.project_in_place(v),
        }
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        self.project_in_place(&mut out);
        out
    }

    pub fn project_dual(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        self.project_dual_in_place(&mut out);
        out
    }

    /// Euclidean distance from `v` to `K`.
    pub fn distance(&self, v: &[f64]) -> f64 {
        match self {
            Cone::Zero(_) => norm(v),
            Cone::Nonneg(_) => sqrt(
                v.iter()
                    .map(|x| {
                        let m = x.min(0.0);
                        m * m
                    })
                    .sum(),
            ),
            Cone::Nonpos(_) => sqrt(
                v.iter()
                    .map(|x| {
                        let m = x.max(0.0);
                        m * m
                    })
                    .sum(),
            ),
            Cone::SecondOrder(_) => {
                let p = self.project(v);
                crate::math::dist(v, &p)
            }
        }
    }

    /// Euclidean distance from `v` to `K*`.
    pub fn dual_distance(&self, v: &[f64]) -> f64 {
        match self {
            Cone::Zero(_) => 0.0,
            _ => self.distance(v),
        }
    }
}

fn project_soc(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let t = v[0];
    let nz = norm(&v[1..]);
    if nz <= t {
        return;
    }
    if nz <= -t {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let scale = 0.5 * (t + nz);
    v[0] = scale;
    for x in &mut v[1..] {
        *x *= scale / nz;
    }
}
