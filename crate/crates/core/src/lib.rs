//! Dual first-order methods for strongly convex conic programs
//!
//! ```text
//! minimize f(u)  subject to  G u + g ∈ K,  u ∈ U
//! ```
//!
//! where `f` is strongly convex, `K` is a closed convex cone and `U` is a
//! simple set. The crate provides the dual gradient method, the dual fast
//! gradient method, a restarted fast method, a regularized fast method and a
//! fast-then-plain hybrid, together with primal recovery from last iterates
//! and weighted averages. The [`certify`] module computes reference solutions
//! and checks traces against the theoretical convergence envelopes.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. Wall-clock timing is injected through [`methods::Clock`].

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod certify;
pub mod cones;
mod error;
pub mod inner;
pub mod linalg;
mod math;
pub mod methods;
pub mod model;

pub use cones::Cone;
pub use error::{Error, Result};
pub use inner::{DualOracle, DualOracleResult, InnerOptions};
pub use linalg::{CsrMatrix, DenseMatrix, Matrix};
pub use methods::{Method, RunOutcome, SolverConfig};
pub use model::{ConicProblem, ObjectiveOracle, SimpleSet};
