//! Flat key/value config file, e.g.
//!
//! ```toml
//! seed = 7
//! patients = 500
//! truth_beta = 0.3
//! world = "logistic"
//! ```

use std::path::Path;

use acuity_core::belief::{GumbelPrior, K0RatioPrior, K1Prior};
use acuity_core::sim::{PatientWorld, SimConfig};
use anyhow::{bail, Context};
use serde::Deserialize;

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub patients: Option<usize>,
    pub questions: Option<usize>,
    pub particles: Option<usize>,
    /// Slip probability of simulated patients.
    pub slip: Option<f64>,
    /// Slip probability assumed by the exam.
    pub model_slip: Option<f64>,
    pub optotypes: Option<u32>,
    pub chart_optotypes: Option<u32>,
    pub tau: Option<f64>,
    pub truth_mu: Option<f64>,
    pub truth_beta: Option<f64>,
    pub prior_mu: Option<f64>,
    pub prior_beta: Option<f64>,
    pub k0_ratio_lo: Option<f64>,
    pub k0_ratio_hi: Option<f64>,
    pub size_min: Option<f64>,
    pub size_max: Option<f64>,
    /// `floored_exponential` or `logistic`.
    pub world: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Applies every key that is set on top of `sim`.
    pub fn apply(&self, sim: &mut SimConfig) -> anyhow::Result<()> {
        if let Some(v) = self.seed {
            sim.master_seed = v;
        }
        if let Some(v) = self.patients {
            sim.n_patients = v;
        }
        if let Some(v) = self.questions {
            sim.exam.max_questions = v;
        }
        if let Some(v) = self.particles {
            sim.exam.particles = v;
        }
        if let Some(v) = self.slip {
            sim.slip = v;
        }
        if let Some(v) = self.model_slip {
            sim.exam.slip_model = v;
        }
        if let Some(v) = self.optotypes {
            sim.optotype_count = v;
        }
        if let Some(v) = self.chart_optotypes {
            sim.chart_optotypes = v;
        }
        if let Some(v) = self.tau {
            sim.tau = v;
        }
        if self.truth_mu.is_some() || self.truth_beta.is_some() {
            sim.truth_prior = GumbelPrior::new(
                self.truth_mu.unwrap_or(sim.truth_prior.mu),
                self.truth_beta.unwrap_or(sim.truth_prior.beta),
            )?;
        }
        if self.prior_mu.is_some() || self.prior_beta.is_some() {
            let base = match &sim.exam.prior {
                K1Prior::Gumbel(g) => *g,
                _ => GumbelPrior::default(),
            };
            sim.exam.prior = K1Prior::Gumbel(GumbelPrior::new(
                self.prior_mu.unwrap_or(base.mu),
                self.prior_beta.unwrap_or(base.beta),
            )?);
        }
        if self.k0_ratio_lo.is_some() || self.k0_ratio_hi.is_some() {
            let r = K0RatioPrior::new(
                self.k0_ratio_lo.unwrap_or(sim.k0_ratio.lo),
                self.k0_ratio_hi.unwrap_or(sim.k0_ratio.hi),
            )?;
            sim.k0_ratio = r;
            sim.exam.k0_ratio = r;
        }
        if let Some(v) = self.size_min {
            sim.exam.size_bounds.min = v;
        }
        if let Some(v) = self.size_max {
            sim.exam.size_bounds.max = v;
        }
        if let Some(w) = &self.world {
            sim.world = match w.as_str() {
                "floored_exponential" => PatientWorld::FlooredExponential,
                "logistic" => PatientWorld::logistic(),
                other => bail!("unknown world {other:?}, expected floored_exponential or logistic"),
            };
        }
        sim.validate()?;
        sim.exam.validate()?;
        Ok(())
    }
}
