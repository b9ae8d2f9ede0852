use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimConfig;
use crate::belief::sample_gumbel;
use crate::exam::Oracle;
use crate::units::Arcmin;
use crate::vrf::{fract_logistic, with_slip, FractParams, Orientation, VrfParams};

/// Response model the simulated population follows.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatientWorld {
    #[default]
    FlooredExponential,
    /// Increasing logistic through `tau` at `k1`, slope drawn uniformly.
    Logistic { slope_lo: f64, slope_hi: f64 },
}

impl PatientWorld {
    pub fn logistic() -> Self {
        PatientWorld::Logistic {
            slope_lo: 4.0,
            slope_hi: 12.0,
        }
    }
}

/// Hidden ground truth for one simulated patient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruePatient {
    pub params: VrfParams,
    pub slip: f64,
    /// Set for logistic-world patients; `params.k1` is still where they see
    /// with probability `tau`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logistic: Option<FractParams>,
}

impl TruePatient {
    pub fn k1(&self) -> f64 {
        self.params.k1.value()
    }

    /// Probability of a correct answer at `size`, slips included.
    pub fn response_prob(&self, size: f64) -> f64 {
        let v = match &self.logistic {
            Some(p) => fract_logistic(Arcmin::new_unchecked(size), p, Orientation::Increasing),
            None => self.params.prob(size),
        };
        with_slip(v, self.slip, self.params.c)
    }

    /// Same patient answering from a different optotype set.
    pub fn with_optotypes(&self, count: u32) -> TruePatient {
        let c = 1.0 / count as f64;
        let mut p = *self;
        p.params.c = c;
        if let Some(l) = &mut p.logistic {
            *l = FractParams::through_threshold(self.k1(), l.slope, c, self.params.tau).expect("valid logistic");
        }
        p
    }
}

pub fn sample_patient<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> TruePatient {
    let k1 = 10f64.powf(sample_gumbel(&cfg.truth_prior, rng).value());
    let k0 = cfg.k0_ratio.sample(rng) * k1;
    let c = 1.0 / cfg.optotype_count as f64;
    let params = VrfParams {
        k0: Arcmin::new_unchecked(k0),
        k1: Arcmin::new_unchecked(k1),
        c,
        tau: cfg.tau,
    };
    let logistic = match cfg.world {
        PatientWorld::FlooredExponential => None,
        PatientWorld::Logistic { slope_lo, slope_hi } => {
            let slope = slope_lo + (slope_hi - slope_lo) * rng.gen::<f64>();
            Some(FractParams::through_threshold(k1, slope, c, cfg.tau).expect("valid logistic"))
        }
    };
    TruePatient {
        params,
        slip: cfg.slip,
        logistic,
    }
}

pub fn simulate_response<R: Rng + ?Sized>(p: &TruePatient, size: Arcmin, rng: &mut R) -> bool {
    rng.gen::<f64>() < p.response_prob(size.value())
}

/// A [`TruePatient`] bundled with its own response noise.
pub struct SimulatedPatient<R> {
    pub patient: TruePatient,
    pub rng: R,
}

impl<R: Rng> Oracle for SimulatedPatient<R> {
    fn respond(&mut self, size: Arcmin) -> Result<bool, String> {
        Ok(simulate_response(&self.patient, size, &mut self.rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patient(slip: f64) -> TruePatient {
        TruePatient {
            params: VrfParams::new(1.0, 2.0, 0.25, 0.8).unwrap(),
            slip,
            logistic: None,
        }
    }

    fn rate(p: &TruePatient, size: f64) -> f64 {
        let mut rng = crate::rng_from_seed(5);
        let n = 100_000;
        let x = Arcmin::new(size).unwrap();
        (0..n).filter(|_| simulate_response(p, x, &mut rng)).count() as f64 / n as f64
    }

    #[test]
    fn response_rates() {
        assert!((rate(&patient(0.0), 0.2) - 0.25).abs() < 0.01);
        assert!((rate(&patient(0.0), 2.0) - 0.8).abs() < 0.01);
        assert!((rate(&patient(0.05), 2.0) - 0.7725).abs() < 0.01);
    }

    #[test]
    fn population_mode_and_validity() {
        let cfg = SimConfig::default();
        let mut rng = crate::rng_from_seed(1);
        let (lo, width, bins) = (-1.0, 0.01, 300usize);
        let mut counts = vec![0u32; bins];
        for _ in 0..1_000_000 {
            let p = sample_patient(&cfg, &mut rng);
            assert!(p.params.k0.value() < p.params.k1.value());
            let b = ((p.k1().log10() - lo) / width).floor();
            if b >= 0.0 && (b as usize) < bins {
                counts[b as usize] += 1;
            }
        }
        let smoothed: Vec<u32> = (0..bins).map(|i| counts[i.saturating_sub(3)..(i + 4).min(bins)].iter().sum()).collect();
        let best = (0..bins).max_by_key(|&i| smoothed[i]).unwrap();
        let mode = 10f64.powf(lo + (best as f64 + 0.5) * width);
        assert!((mode - 2.0).abs() / 2.0 < 0.05, "mode {mode}");
    }

    #[test]
    fn population_is_reproducible() {
        let cfg = SimConfig::default();
        let draw = || {
            let mut rng = crate::rng_from_seed(3);
            (0..50).map(|_| sample_patient(&cfg, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn logistic_world_hits_tau_at_k1() {
        let cfg = SimConfig {
            world: PatientWorld::logistic(),
            slip: 0.0,
            ..Default::default()
        };
        let mut rng = crate::rng_from_seed(2);
        for _ in 0..100 {
            let p = sample_patient(&cfg, &mut rng);
            assert!((p.response_prob(p.k1()) - 0.8).abs() < 1e-12);
            let q = p.with_optotypes(19);
            assert!((q.response_prob(q.k1()) - 0.8).abs() < 1e-12);
        }
    }
}
