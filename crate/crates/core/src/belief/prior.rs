use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::LogMar;

/// Base of the logarithm the Gumbel prior is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Ten,
    E,
}

impl LogBase {
    fn to_log10(self, v: f64) -> f64 {
        match self {
            LogBase::Ten => v,
            LogBase::E => v / std::f64::consts::LN_10,
        }
    }

    fn from_log10(self, v: f64) -> f64 {
        match self {
            LogBase::Ten => v,
            LogBase::E => v * std::f64::consts::LN_10,
        }
    }
}

/// Gumbel distribution over the log of the acuity `k1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelPrior {
    pub mu: f64,
    pub beta: f64,
    #[serde(default)]
    pub base: LogBase,
}

impl Default for GumbelPrior {
    fn default() -> Self {
        GumbelPrior {
            mu: 0.3,
            beta: 0.5,
            base: LogBase::Ten,
        }
    }
}

impl GumbelPrior {
    pub fn new(mu: f64, beta: f64) -> Result<Self> {
        let p = GumbelPrior {
            mu,
            beta,
            base: LogBase::Ten,
        };
        p.validate()?;
        Ok(p)
    }

    /// The prior fitted to FrACT's population.
    pub fn fract_population() -> Self {
        GumbelPrior {
            mu: -0.1,
            beta: 0.3,
            base: LogBase::Ten,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::invalid("mu", "must be finite"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta", format!("{} must be positive", self.beta)));
        }
        Ok(())
    }

    /// Inverse CDF in the prior's own log base.
    pub fn quantile(&self, u: f64) -> f64 {
        self.mu - self.beta * (-u.ln()).ln()
    }

    pub fn cdf(&self, log_value: f64) -> f64 {
        (-(-(log_value - self.mu) / self.beta).exp()).exp()
    }

    /// Mode of `k1` expressed in logMAR.
    pub fn mode_logmar(&self) -> LogMar {
        LogMar(self.base.to_log10(self.mu))
    }

    /// Probability that `log10 k1` lies in `[lo, hi]`.
    pub fn logmar_mass(&self, lo: f64, hi: f64) -> f64 {
        self.cdf(self.base.from_log10(hi)) - self.cdf(self.base.from_log10(lo))
    }
}

/// Draws `log10 k1` by inverting the Gumbel CDF.
pub fn sample_gumbel<R: Rng + ?Sized>(prior: &GumbelPrior, rng: &mut R) -> LogMar {
    let u: f64 = rng.sample(Open01);
    LogMar(prior.base.to_log10(prior.quantile(u)))
}

/// Prior over `k1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum K1Prior {
    Gumbel(GumbelPrior),
    /// Flat in logMAR between the bounds.
    UniformLogMar { lo: f64, hi: f64 },
}

impl Default for K1Prior {
    fn default() -> Self {
        K1Prior::Gumbel(GumbelPrior::default())
    }
}

impl K1Prior {
    /// The uninformative alternative: flat over logMAR -0.5 to 2.
    pub fn flat() -> Self {
        K1Prior::UniformLogMar { lo: -0.5, hi: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            K1Prior::Gumbel(g) => g.validate(),
            K1Prior::UniformLogMar { lo, hi } if lo < hi && lo.is_finite() && hi.is_finite() => Ok(()),
            K1Prior::UniformLogMar { .. } => Err(Error::invalid("prior", "flat prior needs lo < hi")),
        }
    }

    pub fn sample_logmar<R: Rng + ?Sized>(&self, rng: &mut R) -> LogMar {
        match self {
            K1Prior::Gumbel(g) => sample_gumbel(g, rng),
            K1Prior::UniformLogMar { lo, hi } => LogMar(lo + (hi - lo) * rng.gen::<f64>()),
        }
    }

    pub fn mode_logmar(&self) -> LogMar {
        match self {
            K1Prior::Gumbel(g) => g.mode_logmar(),
            K1Prior::UniformLogMar { lo, hi } => LogMar((lo + hi) / 2.0),
        }
    }

    pub fn logmar_mass(&self, lo: f64, hi: f64) -> f64 {
        match self {
            K1Prior::Gumbel(g) => g.logmar_mass(lo, hi),
            K1Prior::UniformLogMar { lo: a, hi: b } => ((hi.min(*b) - lo.max(*a)).max(0.0)) / (b - a),
        }
    }
}

/// `k0 = r * k1` with `r` uniform on `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct K0RatioPrior {
    pub lo: f64,
    pub hi: f64,
}

impl Default for K0RatioPrior {
    fn default() -> Self {
        K0RatioPrior { lo: 0.7, hi: 0.95 }
    }
}

impl K0RatioPrior {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let p = K0RatioPrior { lo, hi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if 0.0 < self.lo && self.lo < self.hi && self.hi < 1.0 {
            Ok(())
        } else {
            Err(Error::invalid("k0_ratio", format!("need 0 < {} < {} < 1", self.lo, self.hi)))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.lo + (self.hi - self.lo) * rng.gen::<f64>()
    }
}
