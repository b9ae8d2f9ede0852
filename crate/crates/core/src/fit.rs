//! Maximum-likelihood fits of response curves to per-size trial counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::nelder_mead_2d;
use crate::units::Arcmin;
use crate::vrf::{fract_logistic, FlooredExp, FractParams, Orientation, VrfParams};

/// Correct answers out of `trials` presentations at one size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeTrialSummary {
    pub size: Arcmin,
    pub successes: u32,
    pub trials: u32,
}

impl SizeTrialSummary {
    pub fn new(size: f64, successes: u32, trials: u32) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("trials", "at least one trial per size"));
        }
        if successes > trials {
            return Err(Error::invalid("successes", format!("{successes} exceeds {trials} trials")));
        }
        Ok(SizeTrialSummary {
            size: Arcmin::new(size)?,
            successes,
            trials,
        })
    }

    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Mean and standard deviation of the Beta(s + 1, f + 1) posterior on the rate.
    pub fn beta_mean_sd(&self) -> (f64, f64) {
        let a = self.successes as f64 + 1.0;
        let b = (self.trials - self.successes) as f64 + 1.0;
        let n = a + b;
        (a / n, (a * b / (n * n * (n + 1.0))).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlooredFit {
    pub params: VrfParams,
    /// Log-likelihood divided by the total number of trials.
    pub mean_log_lik: f64,
    /// Optimum sits outside the tested sizes or on the search box.
    pub boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub params: FractParams,
    pub mean_log_lik: f64,
    pub boundary: bool,
}

const K1_GRID: usize = 80;
const RATIO_GRID: usize = 40;
const RATIO_MIN: f64 = 0.02;
const RATIO_MAX: f64 = 0.98;

fn bernoulli_ll(successes: u32, trials: u32, p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    successes as f64 * p.ln() + (trials - successes) as f64 * (1.0 - p).ln()
}

fn validate(data: &[SizeTrialSummary], c: f64) -> Result<(f64, f64, u64)> {
    let mut sizes: Vec<f64> = data.iter().map(|d| d.size.value()).collect();
    sizes.sort_by(f64::total_cmp);
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::Unfittable(format!("need at least 3 distinct sizes, got {}", sizes.len())));
    }
    // Nothing measurably above the guess rate means no curve is identified.
    let informative = data.iter().any(|d| {
        let sd = (c * (1.0 - c) / d.trials as f64).sqrt();
        d.rate() > c + 2.0 * sd
    });
    if !informative {
        return Err(Error::Unfittable("every size is answered at the guess rate".into()));
    }
    let total: u64 = data.iter().map(|d| d.trials as u64).sum();
    Ok((sizes[0], *sizes.last().unwrap(), total))
}

/// Binomial maximum-likelihood fit of `(k0, k1)` with `c` and `tau` fixed.
///
/// A coarse grid over `(log k1, k0/k1)` seeds a Nelder-Mead refinement.
pub fn fit_floored_exp(data: &[SizeTrialSummary], c: f64, tau: f64) -> Result<FlooredFit> {
    crate::vrf::check_guess_and_target(c, tau)?;
    let (min_size, max_size, total) = validate(data, c)?;
    let curve = FlooredExp::new(c, tau);

    let lo = (min_size / 4.0).ln();
    let hi = (max_size * 4.0).ln();
    let decode = |p: [f64; 2]| {
        let k1 = p[0].clamp(lo, hi).exp();
        let ratio = RATIO_MIN + (RATIO_MAX - RATIO_MIN) * crate::vrf::sigmoid(p[1]);
        (ratio * k1, k1)
    };
    let neg_ll = |p: [f64; 2]| {
        let (k0, k1) = decode(p);
        -data
            .iter()
            .map(|d| bernoulli_ll(d.successes, d.trials, curve.prob(d.size.value(), k0, k1)))
            .sum::<f64>()
    };

    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..K1_GRID {
        let lk1 = lo + (hi - lo) * i as f64 / (K1_GRID - 1) as f64;
        for j in 0..RATIO_GRID {
            let u = (j as f64 + 0.5) / RATIO_GRID as f64;
            let p = [lk1, crate::vrf::logit(u)];
            let v = neg_ll(p);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    let step = [(hi - lo) / K1_GRID as f64, 0.3];
    let (refined, value) = nelder_mead_2d(neg_ll, best.0, step, 2000, 1e-12);
    let (point, value) = if value <= best.1 { (refined, value) } else { best };

    let (k0, k1) = decode(point);
    let params = VrfParams::new(k0, k1, c, tau)?;
    let edge = 1e-6;
    let boundary = k1 < min_size || k1 > max_size || point[0] <= lo + edge || point[0] >= hi - edge;
    Ok(FlooredFit {
        params,
        mean_log_lik: -value / total as f64,
        boundary,
    })
}

/// Maximum-likelihood fit of the increasing logistic with guess rate `c`.
pub fn fit_logistic(data: &[SizeTrialSummary], c: f64) -> Result<LogisticFit> {
    let (min_size, max_size, total) = validate(data, c)?;
    let lo = (min_size / 4.0).ln();
    let hi = (max_size * 4.0).ln();
    let (slope_lo, slope_hi) = (0.05f64.ln(), 50f64.ln());
    let decode = |p: [f64; 2]| {
        let threshold = p[0].clamp(lo, hi).exp();
        let slope = p[1].clamp(slope_lo, slope_hi).exp();
        FractParams { v0: 1.0 / threshold, slope, c }
    };
    let neg_ll = |p: [f64; 2]| {
        let params = decode(p);
        -data
            .iter()
            .map(|d| bernoulli_ll(d.successes, d.trials, fract_logistic(d.size, &params, Orientation::Increasing)))
            .sum::<f64>()
    };

    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..K1_GRID {
        let lt = lo + (hi - lo) * i as f64 / (K1_GRID - 1) as f64;
        for j in 0..RATIO_GRID {
            let ls = slope_lo + (slope_hi - slope_lo) * j as f64 / (RATIO_GRID - 1) as f64;
            let v = neg_ll([lt, ls]);
            if v < best.1 {
                best = ([lt, ls], v);
            }
        }
    }
    let (refined, value) = nelder_mead_2d(neg_ll, best.0, [0.05, 0.1], 2000, 1e-12);
    let (point, value) = if value <= best.1 { (refined, value) } else { best };
    let edge = 1e-6;
    let boundary = point[0] <= lo + edge
        || point[0] >= hi - edge
        || point[1] <= slope_lo + edge
        || point[1] >= slope_hi - edge;
    Ok(LogisticFit {
        params: decode(point),
        mean_log_lik: -value / total as f64,
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn synthetic(truth: &VrfParams, sizes: &[f64], trials: u32, seed: u64) -> Vec<SizeTrialSummary> {
        let mut rng = crate::rng_from_seed(seed);
        sizes
            .iter()
            .map(|&x| {
                let p = truth.prob(x);
                let successes = (0..trials).filter(|_| rng.gen::<f64>() < p).count() as u32;
                SizeTrialSummary::new(x, successes, trials).unwrap()
            })
            .collect()
    }

    const SIZES: [f64; 8] = [0.5, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.5];

    #[test]
    fn recovers_k1_from_synthetic_counts() {
        let truth = VrfParams::new(1.0, 2.0, 0.25, 0.8).unwrap();
        for seed in 0..5 {
            let data = synthetic(&truth, &SIZES, 500, seed);
            let fit = fit_floored_exp(&data, 0.25, 0.8).unwrap();
            let err = (fit.params.k1.value() - 2.0).abs() / 2.0;
            assert!(err < 0.05, "seed {seed}: k1 = {}", fit.params.k1.value());
            assert!(!fit.boundary);
        }
    }

    #[test]
    fn perfect_answers_give_boundary_fit() {
        let data: Vec<_> = SIZES.iter().map(|&x| SizeTrialSummary::new(x, 50, 50).unwrap()).collect();
        let fit = fit_floored_exp(&data, 0.25, 0.8).unwrap();
        assert!(fit.boundary);
        assert!(fit.params.k1.value() < SIZES[0]);
    }

    #[test]
    fn guessing_everywhere_is_unfittable() {
        let data: Vec<_> = SIZES.iter().map(|&x| SizeTrialSummary::new(x, 25, 100).unwrap()).collect();
        assert!(matches!(fit_floored_exp(&data, 0.25, 0.8), Err(Error::Unfittable(_))));
    }

    #[test]
    fn too_few_sizes_is_unfittable() {
        let data = vec![
            SizeTrialSummary::new(1.0, 10, 100).unwrap(),
            SizeTrialSummary::new(2.0, 90, 100).unwrap(),
        ];
        assert!(fit_floored_exp(&data, 0.25, 0.8).is_err());
    }

    #[test]
    fn floored_beats_logistic_on_floored_data() {
        let truth = VrfParams::new(1.0, 2.0, 0.25, 0.8).unwrap();
        let data = synthetic(&truth, &SIZES, 500, 11);
        let fe = fit_floored_exp(&data, 0.25, 0.8).unwrap();
        let lg = fit_logistic(&data, 0.25).unwrap();
        assert!(fe.mean_log_lik >= lg.mean_log_lik, "{} < {}", fe.mean_log_lik, lg.mean_log_lik);
    }

    #[test]
    fn beta_error_bar() {
        let s = SizeTrialSummary::new(1.0, 3, 8).unwrap();
        let (m, sd) = s.beta_mean_sd();
        // Beta(4, 6)
        assert!((m - 0.4).abs() < 1e-12);
        assert!((sd - (24.0f64 / (100.0 * 11.0)).sqrt()).abs() < 1e-12);
    }
}
