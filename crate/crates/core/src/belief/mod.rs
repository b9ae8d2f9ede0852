//! Particle posterior over a patient's `(k0, k1)`.

mod kde;
mod particles;
mod prior;

pub use kde::{kde_mode_index, silverman_bandwidth};
pub use particles::{Likelihood, Particle, ParticleSet};
pub use prior::{sample_gumbel, GumbelPrior, K0RatioPrior, K1Prior, LogBase};

use serde::{Deserialize, Serialize};

use crate::units::Arcmin;

/// One exam step: the size shown and whether the answer was right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub size: Arcmin,
    pub correct: bool,
}

impl Observation {
    pub fn new(size: Arcmin, correct: bool) -> Self {
        Observation { size, correct }
    }
}
