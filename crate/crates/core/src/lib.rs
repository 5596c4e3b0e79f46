//! Usual-stochastic-order comparisons of weighted sums `Σ a_i Y_i` of i.i.d.
//! random variables.
//!
//! The crate checks majorization premises on the weights and log-concavity
//! conditions on the law of `Y_i`, estimates the distribution function of the
//! weighted sums (exactly, by quadrature, or by Monte Carlo with common random
//! numbers), tests the resulting dominance, evaluates the associated tail
//! bounds, and numerically verifies the auxiliary inequalities behind the
//! ordering results.

pub mod appendix;
pub mod bounds;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod majorization;
mod parse;
pub mod quadrature;
pub mod rng;
pub mod sum_engine;

pub use distributions::{DistributionSpec, Family, Law};
pub use error::{Error, Result};
pub use majorization::{PremiseMode, WeightVector};
pub use rng::SeededStream;
