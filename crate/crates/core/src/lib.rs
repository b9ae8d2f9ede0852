//! Adaptive visual acuity testing.
//!
//! The crate is organised bottom-up:
//!
//! - [`units`] and [`vrf`]: acuity units and the visual response functions
//!   (Floored Exponential, logistic), plus [`fit`] for fitting them to
//!   per-size trial counts.
//! - [`belief`]: the weighted particle posterior over `(k0, k1)`.
//! - [`policy`]: next-letter-size selection (posterior matching, greedy MAP,
//!   the FrACT maximum-likelihood rule).
//! - [`exam`]: full exams against any response oracle, including the chart
//!   baselines.
//! - [`sim`]: virtual patients, metrics and the benchmark experiments.

pub mod belief;
pub mod error;
pub mod exam;
pub mod fit;
mod optim;
pub mod policy;
pub mod sim;
pub mod units;
pub mod vrf;

pub use error::{Error, Result};
pub use units::{Arcmin, LogMar};
pub use vrf::VrfParams;

/// Deterministic generator used throughout the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate's generator from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
