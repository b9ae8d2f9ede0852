//! Visual response functions: probability of naming an optotype correctly as
//! a function of its size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Arcmin;

/// Largest magnitude allowed for the exponent of the Floored Exponential.
const MAX_EXPONENT: f64 = 700.0;

/// Largest double below 1.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Floored Exponential parameters.
///
/// `k0` is the size where the patient starts to discern the optotype,
/// `k1` the acuity (size seen with probability `tau`), `c` the guess rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VrfParams {
    pub k0: Arcmin,
    pub k1: Arcmin,
    pub c: f64,
    pub tau: f64,
}

impl VrfParams {
    pub fn new(k0: f64, k1: f64, c: f64, tau: f64) -> Result<Self> {
        let k0 = Arcmin::new(k0)?;
        let k1 = Arcmin::new(k1)?;
        if k0.value() >= k1.value() {
            return Err(Error::invalid("k0", format!("k0 = {} must be below k1 = {}", k0.value(), k1.value())));
        }
        check_guess_and_target(c, tau)?;
        Ok(VrfParams { k0, k1, c, tau })
    }

    pub fn prob(&self, x: f64) -> f64 {
        FlooredExp::new(self.c, self.tau).prob(x, self.k0.value(), self.k1.value())
    }
}

pub(crate) fn check_guess_and_target(c: f64, tau: f64) -> Result<()> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::invalid("c", format!("guess rate {c} must lie in (0, 1)")));
    }
    if !(tau > c && tau <= 1.0) {
        return Err(Error::invalid("tau", format!("target {tau} must lie in (c, 1] with c = {c}")));
    }
    Ok(())
}

/// Floored Exponential with the per-exam constants `c` and `tau` folded in.
///
/// Evaluating many `(k0, k1)` pairs at one size is the particle-update hot
/// loop, so the log of the base is computed once.
#[derive(Debug, Clone, Copy)]
pub struct FlooredExp {
    c: f64,
    ln_base: f64,
    max_exponent: f64,
}

impl FlooredExp {
    pub fn new(c: f64, tau: f64) -> Self {
        let ln_base = ((1.0 - tau) / (1.0 - c)).ln();
        let max_exponent = if ln_base.is_finite() {
            MAX_EXPONENT / ln_base.abs()
        } else {
            f64::INFINITY
        };
        FlooredExp {
            c,
            ln_base,
            max_exponent,
        }
    }

    #[inline]
    pub fn prob(&self, x: f64, k0: f64, k1: f64) -> f64 {
        if x <= k0 {
            return self.c;
        }
        let t = ((x - k0) / (k1 - k0)).min(self.max_exponent);
        if self.ln_base == f64::NEG_INFINITY {
            return 1.0;
        }
        let v = 1.0 - (1.0 - self.c) * (self.ln_base * t).exp();
        // Keep a sub-unit tau strictly below 1 after rounding.
        v.clamp(self.c, BELOW_ONE)
    }

    /// `1 - prob`, formed without cancellation far above threshold.
    #[inline]
    pub fn miss(&self, x: f64, k0: f64, k1: f64) -> f64 {
        if x <= k0 {
            return 1.0 - self.c;
        }
        if self.ln_base == f64::NEG_INFINITY {
            return 0.0;
        }
        let t = ((x - k0) / (k1 - k0)).min(self.max_exponent);
        (1.0 - self.c) * (self.ln_base * t).exp()
    }
}

/// `max{c, 1 - (1-c)((1-tau)/(1-c))^((x-k0)/(k1-k0))}`.
pub fn floored_exp(x: Arcmin, p: &VrfParams) -> f64 {
    p.prob(x.value())
}

/// Location/scale form of the Floored Exponential: `max{c, 1 - (1-c) e^{-lambda (x - b)}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocationScaleParams {
    pub b: Arcmin,
    pub lambda: f64,
    pub c: f64,
}

impl LocationScaleParams {
    pub fn new(b: f64, lambda: f64, c: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("scale {lambda} must be positive")));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::invalid("c", format!("guess rate {c} must lie in (0, 1)")));
        }
        Ok(LocationScaleParams {
            b: Arcmin::new(b)?,
            lambda,
            c,
        })
    }

    pub fn prob(&self, x: f64) -> f64 {
        let v = 1.0 - (1.0 - self.c) * (-self.lambda * (x - self.b.value())).exp();
        v.max(self.c)
    }
}

/// Rewrites the location/scale form in terms of `(k0, k1)` for target `tau`.
pub fn reparameterize(ls: &LocationScaleParams, tau: f64) -> Result<VrfParams> {
    if !(tau > ls.c && tau < 1.0) {
        return Err(Error::invalid("tau", format!("target {tau} must lie in (c, 1) with c = {}", ls.c)));
    }
    let k0 = ls.b.value();
    let k1 = k0 + ((1.0 - ls.c) / (1.0 - tau)).ln() / ls.lambda;
    if k1 <= k0 {
        return Err(Error::invalid("lambda", "scale too large to separate k0 and k1 in f64"));
    }
    VrfParams::new(k0, k1, ls.c, tau)
}

/// Inverse of [`reparameterize`].
pub fn to_location_scale(p: &VrfParams) -> Result<LocationScaleParams> {
    if p.tau >= 1.0 {
        return Err(Error::invalid("tau", "tau = 1 has no finite scale"));
    }
    let lambda = ((1.0 - p.c) / (1.0 - p.tau)).ln() / (p.k1.value() - p.k0.value());
    LocationScaleParams::new(p.k0.value(), lambda, p.c)
}

/// Parameters of the FrACT logistic `c + (1-c) / (1 + (v0 x)^s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractParams {
    pub v0: f64,
    pub slope: f64,
    pub c: f64,
}

impl FractParams {
    pub fn new(v0: f64, slope: f64, c: f64) -> Result<Self> {
        if !(v0 > 0.0 && v0.is_finite()) {
            return Err(Error::invalid("v0", format!("{v0} must be positive")));
        }
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Error::invalid("slope", format!("{slope} must be positive")));
        }
        if !(c >= 0.0 && c < 1.0) {
            return Err(Error::invalid("c", format!("guess rate {c} must lie in [0, 1)")));
        }
        Ok(FractParams { v0, slope, c })
    }

    /// Size at which the increasing-orientation curve reaches `tau`.
    pub fn threshold_at(&self, tau: f64) -> f64 {
        let q = (tau - self.c) / (1.0 - self.c);
        (logit(q) / self.slope).exp() / self.v0
    }

    /// Builds the increasing-orientation curve that passes through `tau` at `k1`.
    pub fn through_threshold(k1: f64, slope: f64, c: f64, tau: f64) -> Result<Self> {
        let q = (tau - c) / (1.0 - c);
        FractParams::new((logit(q) / slope).exp() / k1, slope, c)
    }
}

/// Which way the logistic runs in letter size.
///
/// `AsPrinted` is `c + (1-c)/(1 + (v0 x)^s)`, which falls as letters grow;
/// that form is natural in decimal acuity units. `Increasing` replaces the
/// exponent by `-s` so that larger letters are easier, matching the
/// Floored Exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    AsPrinted,
    #[default]
    Increasing,
}

pub fn fract_logistic(x: Arcmin, p: &FractParams, orientation: Orientation) -> f64 {
    let u = p.slope * (p.v0 * x.value()).ln();
    let u = match orientation {
        Orientation::AsPrinted => -u,
        Orientation::Increasing => u,
    };
    p.c + (1.0 - p.c) * sigmoid(u)
}

/// Mixes in accidental wrong answers: `slip * c + (1 - slip) * v`.
#[inline]
pub fn with_slip(v: f64, slip: f64, c: f64) -> f64 {
    slip * c + (1.0 - slip) * v
}

#[inline]
pub(crate) fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn logit(q: f64) -> f64 {
    (q / (1.0 - q)).ln()
}

/// Normalised height above the floor that the logistic belief model assigns
/// to `k0`.
pub const LOGISTIC_K0_ANCHOR: f64 = 0.1;

/// Response curve family used by a belief to score `(k0, k1)` particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseModel {
    #[default]
    FlooredExponential,
    /// Increasing logistic through `tau` at `k1` and through
    /// [`LOGISTIC_K0_ANCHOR`] of its range at `k0`.
    Logistic,
}

/// A [`ResponseModel`] with the exam constants bound.
#[derive(Debug, Clone, Copy)]
pub enum ResponseCurve {
    Floored(FlooredExp),
    Logistic {
        c: f64,
        logit_target: f64,
        logit_anchor: f64,
    },
}

impl ResponseCurve {
    pub fn new(model: ResponseModel, c: f64, tau: f64) -> Self {
        match model {
            ResponseModel::FlooredExponential => ResponseCurve::Floored(FlooredExp::new(c, tau)),
            ResponseModel::Logistic => {
                // tau = 1 would put k1 at infinite logit; cap just below.
                let q = ((tau - c) / (1.0 - c)).min(1.0 - 1e-9);
                let anchor = LOGISTIC_K0_ANCHOR.min(q / 2.0);
                ResponseCurve::Logistic {
                    c,
                    logit_target: logit(q),
                    logit_anchor: logit(anchor),
                }
            }
        }
    }

    #[inline]
    pub fn prob(&self, x: f64, k0: f64, k1: f64) -> f64 {
        match *self {
            ResponseCurve::Floored(f) => f.prob(x, k0, k1),
            ResponseCurve::Logistic {
                c,
                logit_target,
                logit_anchor,
            } => {
                let slope = (logit_target - logit_anchor) / (k1 / k0).ln();
                let u = slope * (x / k1).ln() + logit_target;
                c + (1.0 - c) * sigmoid(u)
            }
        }
    }

    #[inline]
    pub fn miss(&self, x: f64, k0: f64, k1: f64) -> f64 {
        match *self {
            ResponseCurve::Floored(f) => f.miss(x, k0, k1),
            ResponseCurve::Logistic {
                c,
                logit_target,
                logit_anchor,
            } => {
                let slope = (logit_target - logit_anchor) / (k1 / k0).ln();
                let u = slope * (x / k1).ln() + logit_target;
                (1.0 - c) * sigmoid(-u)
            }
        }
    }
}
