use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{K0RatioPrior, K1Prior, Observation};
use crate::error::{Error, Result};
use crate::units::Arcmin;
use crate::vrf::{ResponseCurve, ResponseModel};

/// Renormalise once the summed weight falls below this.
const UNDERFLOW_GUARD: f64 = 1e-100;

/// One weighted `(k0, k1)` hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub k0: f64,
    pub k1: f64,
    pub weight: f64,
}

/// How a single response is scored against a particle.
#[derive(Debug, Clone, Copy)]
pub struct Likelihood {
    curve: ResponseCurve,
    c: f64,
    slip: f64,
}

impl Likelihood {
    pub fn new(model: ResponseModel, c: f64, tau: f64, slip: f64) -> Self {
        Likelihood {
            curve: ResponseCurve::new(model, c, tau),
            c,
            slip,
        }
    }

    /// `p(obs | k0, k1)`, with the miss probability formed directly so that
    /// it does not cancel to zero far above threshold.
    #[inline]
    pub fn eval(&self, obs_size: f64, correct: bool, k0: f64, k1: f64) -> f64 {
        if correct {
            let hit = self.curve.prob(obs_size, k0, k1);
            self.slip * self.c + (1.0 - self.slip) * hit
        } else {
            let miss = self.curve.miss(obs_size, k0, k1);
            self.slip * (1.0 - self.c) + (1.0 - self.slip) * miss
        }
    }
}

/// Weighted particles approximating `f(k0, k1 | D)`.
///
/// Positions are fixed at construction; observations only rescale weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSet {
    particles: Vec<Particle>,
    total_weight: f64,
    /// Log of the factor divided out by renormalisations.
    log_scale: f64,
}

impl ParticleSet {
    pub fn from_prior<R: Rng + ?Sized>(k1_prior: &K1Prior, k0_prior: &K0RatioPrior, n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("particles", "need at least one particle"));
        }
        k1_prior.validate()?;
        k0_prior.validate()?;
        let particles = (0..n)
            .map(|_| {
                let k1 = 10f64.powf(k1_prior.sample_logmar(rng).value());
                let k0 = k0_prior.sample(rng) * k1;
                Particle { k0, k1, weight: 1.0 }
            })
            .collect();
        Ok(ParticleSet {
            particles,
            total_weight: n as f64,
            log_scale: 0.0,
        })
    }

    /// Builds a set from explicit particles. Weights must be non-negative
    /// with a positive sum, and every particle needs `0 < k0 < k1`.
    pub fn from_particles(particles: Vec<Particle>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::invalid("particles", "need at least one particle"));
        }
        for p in &particles {
            if !(p.k0 > 0.0 && p.k0 < p.k1 && p.k1.is_finite()) {
                return Err(Error::invalid("particle", format!("need 0 < k0 < k1, got ({}, {})", p.k0, p.k1)));
            }
            if !(p.weight >= 0.0 && p.weight.is_finite()) {
                return Err(Error::invalid("weight", format!("{} is not a valid weight", p.weight)));
            }
        }
        let total_weight: f64 = particles.iter().map(|p| p.weight).sum();
        if total_weight <= 0.0 {
            return Err(Error::EmptyBelief);
        }
        Ok(ParticleSet {
            particles,
            total_weight,
            log_scale: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Log of the unnormalised evidence carried by the weights.
    pub fn log_total_weight(&self) -> f64 {
        self.total_weight.ln() + self.log_scale
    }

    pub fn normalized_weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight / self.total_weight).collect()
    }

    fn rescale(&mut self) {
        let max = self.particles.iter().map(|p| p.weight).fold(0.0, f64::max);
        if max > 0.0 {
            for p in &mut self.particles {
                p.weight /= max;
            }
            self.log_scale += max.ln();
            self.total_weight = self.particles.iter().map(|p| p.weight).sum();
        }
    }

    /// Multiplies every weight by the likelihood of `obs`.
    pub fn update(&mut self, obs: &Observation, lik: &Likelihood) -> Result<()> {
        if self.total_weight < UNDERFLOW_GUARD {
            self.rescale();
        }
        let x = obs.size.value();
        let mut total = 0.0;
        for p in &mut self.particles {
            p.weight *= lik.eval(x, obs.correct, p.k0, p.k1);
            total += p.weight;
        }
        self.total_weight = total;
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::EmptyBelief);
        }
        log::trace!("update at {x:.3} ({}), ess {:.1}", obs.correct, self.effective_sample_size());
        Ok(())
    }

    /// Reweights by the joint likelihood of a batch in one pass.
    pub fn update_batch(&mut self, observations: &[Observation], lik: &Likelihood) -> Result<()> {
        if self.total_weight < UNDERFLOW_GUARD {
            self.rescale();
        }
        let mut total = 0.0;
        for p in &mut self.particles {
            let joint: f64 = observations
                .iter()
                .map(|o| lik.eval(o.size.value(), o.correct, p.k0, p.k1))
                .product();
            p.weight *= joint;
            total += p.weight;
        }
        self.total_weight = total;
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::EmptyBelief);
        }
        Ok(())
    }

    pub fn effective_sample_size(&self) -> f64 {
        let sq: f64 = self.particles.iter().map(|p| p.weight * p.weight).sum();
        if sq > 0.0 {
            self.total_weight * self.total_weight / sq
        } else {
            0.0
        }
    }

    fn check_weight(&self) -> Result<()> {
        if self.total_weight > 0.0 && self.total_weight.is_finite() {
            Ok(())
        } else {
            Err(Error::EmptyBelief)
        }
    }

    /// Mode of the marginal posterior of `k1`: the particle where a weighted
    /// Gaussian KDE over `log10 k1` is highest.
    pub fn posterior_map(&self) -> Result<Arcmin> {
        self.check_weight()?;
        let logs: Vec<f64> = self.particles.iter().map(|p| p.k1.log10()).collect();
        let weights: Vec<f64> = self.particles.iter().map(|p| p.weight).collect();
        let idx = super::kde_mode_index(&logs, &weights);
        Ok(Arcmin::new_unchecked(self.particles[idx].k1))
    }

    /// Draws a particle with probability proportional to its weight.
    pub fn posterior_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Arcmin> {
        self.check_weight()?;
        let target = rng.gen::<f64>() * self.total_weight;
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, p) in self.particles.iter().enumerate() {
            if p.weight > 0.0 {
                last_positive = i;
                acc += p.weight;
                if acc > target {
                    return Ok(Arcmin::new_unchecked(p.k1));
                }
            }
        }
        // Rounding can leave `acc` a hair under `target`.
        Ok(Arcmin::new_unchecked(self.particles[last_positive].k1))
    }

    /// Posterior probability that the relative error of `center` is at most `rel_eps`,
    /// i.e. the mass of `k1` in `[center / (1 + eps), center / (1 - eps)]`.
    pub fn credible_mass(&self, center: Arcmin, rel_eps: f64) -> f64 {
        let c = center.value();
        let lo = c / (1.0 + rel_eps);
        let hi = if rel_eps < 1.0 { c / (1.0 - rel_eps) } else { f64::INFINITY };
        let inside: f64 = self
            .particles
            .iter()
            .filter(|p| p.k1 >= lo && p.k1 <= hi)
            .map(|p| p.weight)
            .sum();
        (inside / self.total_weight).clamp(0.0, 1.0)
    }

    /// Weighted quantiles of `k1`. Each returned value is the smallest
    /// particle whose cumulative weight reaches `q`.
    pub fn posterior_quantiles(&self, qs: &[f64]) -> Result<Vec<Arcmin>> {
        self.check_weight()?;
        if qs.iter().any(|q| !(*q > 0.0 && *q < 1.0)) || qs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("quantiles", "must be sorted and inside (0, 1)"));
        }
        let mut order: Vec<usize> = (0..self.particles.len()).collect();
        order.sort_by(|&a, &b| self.particles[a].k1.total_cmp(&self.particles[b].k1));
        let mut out = Vec::with_capacity(qs.len());
        let mut acc = 0.0;
        let mut it = order.iter().peekable();
        let mut current = order[0];
        for &q in qs {
            let target = q * self.total_weight;
            while acc < target * (1.0 - 1e-12) {
                match it.next() {
                    Some(&i) => {
                        acc += self.particles[i].weight;
                        current = i;
                    }
                    None => break,
                }
            }
            out.push(Arcmin::new_unchecked(self.particles[current].k1));
        }
        Ok(out)
    }

    /// Posterior mass of `log10 k1` in `bins` equal cells over `[lo, hi]`.
    /// Mass outside the range is folded into the end cells.
    pub fn logmar_histogram(&self, lo: f64, hi: f64, bins: usize) -> Vec<f64> {
        let mut out = vec![0.0; bins.max(1)];
        let width = (hi - lo) / out.len() as f64;
        let last = out.len() - 1;
        for p in &self.particles {
            let b = ((p.k1.log10() - lo) / width).floor();
            let b = if b < 0.0 { 0 } else { (b as usize).min(last) };
            out[b] += p.weight / self.total_weight;
        }
        out
    }

    pub fn k1_range(&self) -> (f64, f64) {
        self.particles
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.k1), hi.max(p.k1)))
    }
}
