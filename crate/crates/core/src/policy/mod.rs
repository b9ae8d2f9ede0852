//! Next-letter-size selection.

mod fract;

pub use fract::{fract_acuity, fract_mle, fract_next_size, FractFit, SLOPE_RANGE};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::ParticleSet;
use crate::error::{Error, Result};
use crate::units::Arcmin;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "sizes", rename_all = "snake_case")]
pub enum PolicyKind {
    /// Show a size drawn from the current posterior of `k1`.
    PosteriorMatching,
    /// Show the current posterior mode.
    GreedyMap,
    /// FrACT: show the steepest point of the maximum-likelihood logistic.
    FractMaxInfo,
    /// Replay a fixed list of sizes, repeating the last one when exhausted.
    FixedSequence(Vec<Arcmin>),
}

impl PolicyKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            PolicyKind::FixedSequence(s) if s.is_empty() => Err(Error::invalid("policy", "fixed sequence is empty")),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::PosteriorMatching => "posterior_matching",
            PolicyKind::GreedyMap => "greedy_map",
            PolicyKind::FractMaxInfo => "fract",
            PolicyKind::FixedSequence(_) => "fixed_sequence",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "posterior_matching" | "posterior-matching" => Ok(PolicyKind::PosteriorMatching),
            "greedy_map" | "greedy-map" | "greedymap" => Ok(PolicyKind::GreedyMap),
            "fract" | "fract_max_info" => Ok(PolicyKind::FractMaxInfo),
            other => Err(Error::invalid("policy", format!("unknown policy {other:?}"))),
        }
    }
}

/// Range of sizes the display can show.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for SizeBounds {
    fn default() -> Self {
        SizeBounds { min: 0.1, max: 200.0 }
    }
}

impl SizeBounds {
    pub fn validate(&self) -> Result<()> {
        if self.min > 0.0 && self.min < self.max && self.max.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("size_bounds", format!("need 0 < {} < {}", self.min, self.max)))
        }
    }

    /// Clamps into range, reporting whether clamping happened.
    pub fn clamp(&self, x: f64) -> (Arcmin, bool) {
        let clamped = x.clamp(self.min, self.max);
        if clamped != x {
            log::debug!("size {x:.4} clamped to {clamped:.4}");
        }
        (Arcmin::new_unchecked(clamped), clamped != x)
    }
}

pub fn next_size_posterior_matching<R: Rng + ?Sized>(ps: &ParticleSet, bounds: &SizeBounds, rng: &mut R) -> Result<(Arcmin, bool)> {
    Ok(bounds.clamp(ps.posterior_sample(rng)?.value()))
}

pub fn next_size_greedy_map(ps: &ParticleSet, bounds: &SizeBounds) -> Result<(Arcmin, bool)> {
    Ok(bounds.clamp(ps.posterior_map()?.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{K0RatioPrior, K1Prior, Particle};

    fn point_mass(k1: f64) -> ParticleSet {
        ParticleSet::from_particles(vec![Particle { k0: k1 / 2.0, k1, weight: 1.0 }]).unwrap()
    }

    fn wide(seed: u64) -> ParticleSet {
        let mut rng = crate::rng_from_seed(seed);
        ParticleSet::from_prior(&K1Prior::default(), &K0RatioPrior::default(), 5000, &mut rng).unwrap()
    }

    #[test]
    fn point_mass_policies_agree() {
        let ps = point_mass(2.5);
        let mut rng = crate::rng_from_seed(1);
        let b = SizeBounds::default();
        for _ in 0..50 {
            assert_eq!(next_size_posterior_matching(&ps, &b, &mut rng).unwrap(), next_size_greedy_map(&ps, &b).unwrap());
        }
    }

    #[test]
    fn clamps_to_display_range() {
        let b = SizeBounds::default();
        let mut rng = crate::rng_from_seed(1);
        let (x, clamped) = next_size_posterior_matching(&point_mass(0.01), &b, &mut rng).unwrap();
        assert_eq!(x.value(), 0.1);
        assert!(clamped);
        let (x, clamped) = next_size_greedy_map(&point_mass(500.0), &b).unwrap();
        assert_eq!(x.value(), 200.0);
        assert!(clamped);
        let ps = wide(2);
        for _ in 0..2000 {
            let (x, _) = next_size_posterior_matching(&ps, &b, &mut rng).unwrap();
            assert!(x.value() >= b.min && x.value() <= b.max);
        }
    }

    #[test]
    fn greedy_delegates_to_map() {
        let ps = wide(3);
        let b = SizeBounds { min: 1e-6, max: 1e9 };
        assert_eq!(next_size_greedy_map(&ps, &b).unwrap().0, ps.posterior_map().unwrap());
        assert_eq!(next_size_greedy_map(&ps, &b).unwrap(), next_size_greedy_map(&ps, &b).unwrap());
    }

    #[test]
    fn matching_follows_posterior_histogram() {
        let ps = wide(4);
        let b = SizeBounds { min: 1e-9, max: 1e12 };
        let edges = [-0.3, 0.0, 0.2, 0.4, 0.6, 0.9, 1.3];
        let bin = |l: f64| edges.iter().filter(|&&e| l >= e).count();
        let mut expected = vec![0.0; edges.len() + 1];
        for (p, w) in ps.particles().iter().zip(ps.normalized_weights()) {
            expected[bin(p.k1.log10())] += w;
        }
        let n = 10_000;
        let mut observed = vec![0.0; edges.len() + 1];
        let mut rng = crate::rng_from_seed(5);
        for _ in 0..n {
            observed[bin(next_size_posterior_matching(&ps, &b, &mut rng).unwrap().0.value().log10())] += 1.0;
        }
        let chi2: f64 = observed
            .iter()
            .zip(&expected)
            .map(|(o, e)| (o - e * n as f64).powi(2) / (e * n as f64))
            .sum();
        // 7 degrees of freedom; 99.9th percentile is 24.3.
        assert!(chi2 < 24.3, "chi2 {chi2}");
    }

    #[test]
    fn policy_names_parse() {
        for p in [PolicyKind::PosteriorMatching, PolicyKind::GreedyMap, PolicyKind::FractMaxInfo] {
            assert_eq!(p.name().parse::<PolicyKind>().unwrap(), p);
        }
        assert!(PolicyKind::FixedSequence(vec![]).validate().is_err());
    }
}
