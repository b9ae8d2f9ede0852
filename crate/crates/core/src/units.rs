//! Acuity units. Arcmin is the canonical unit; logMAR and Snellen fractions
//! are views over it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular size in minutes of visual arc. Always strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Arcmin(f64);

impl Arcmin {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Arcmin(value))
        } else {
            Err(Error::invalid("arcmin", format!("{value} is not a positive finite size")))
        }
    }

    /// Caller guarantees `value > 0`; checked only in debug builds.
    pub(crate) fn new_unchecked(value: f64) -> Self {
        debug_assert!(value > 0.0 && value.is_finite(), "bad arcmin {value}");
        Arcmin(value)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_logmar(self) -> LogMar {
        LogMar(self.0.log10())
    }

    /// Snellen denominator for a 20-foot numerator (20/20 is 1 arcmin).
    pub fn snellen_denominator_20ft(self) -> f64 {
        20.0 * self.0
    }
}

impl TryFrom<f64> for Arcmin {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Arcmin::new(v)
    }
}

impl From<Arcmin> for f64 {
    fn from(a: Arcmin) -> f64 {
        a.0
    }
}

impl std::fmt::Display for Arcmin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4} arcmin", self.0)
    }
}

/// log10 of the minimum angle of resolution in arcmin.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogMar(pub f64);

impl LogMar {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_arcmin(self) -> Result<Arcmin> {
        Arcmin::new(10f64.powf(self.0))
    }
}

pub fn arcmin_to_logmar(x: f64) -> Result<LogMar> {
    Ok(Arcmin::new(x)?.to_logmar())
}

pub fn logmar_to_arcmin(l: LogMar) -> Result<Arcmin> {
    l.to_arcmin()
}

/// Converts a Snellen fraction (feet or metres) to arcmin: 20/40 is 2 arcmin.
pub fn snellen_to_arcmin(numerator: f64, denominator: f64) -> Result<Arcmin> {
    if !(numerator > 0.0 && numerator.is_finite()) {
        return Err(Error::invalid("numerator", format!("{numerator} must be positive")));
    }
    if !(denominator > 0.0 && denominator.is_finite()) {
        return Err(Error::invalid("denominator", format!("{denominator} must be positive")));
    }
    Arcmin::new(denominator / numerator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn logmar_examples() {
        assert_eq!(arcmin_to_logmar(1.0).unwrap().value(), 0.0);
        assert!((arcmin_to_logmar(2.0).unwrap().value() - 0.301_029_995_663_981_2).abs() < 1e-12);
        assert!((arcmin_to_logmar(10.0).unwrap().value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(arcmin_to_logmar(0.0).is_err());
        assert!(arcmin_to_logmar(-3.0).is_err());
        assert!(Arcmin::new(f64::NAN).is_err());
        assert!(serde_json::from_str::<Arcmin>("-1.0").is_err());
    }

    #[test]
    fn snellen_examples() {
        assert_eq!(snellen_to_arcmin(20.0, 20.0).unwrap().value(), 1.0);
        assert_eq!(snellen_to_arcmin(20.0, 40.0).unwrap().value(), 2.0);
        assert_eq!(snellen_to_arcmin(6.0, 6.0).unwrap().value(), 1.0);
        assert!(snellen_to_arcmin(0.0, 20.0).is_err());
    }

    proptest! {
        #[test]
        fn logmar_round_trip(x in 1e-3f64..1e4) {
            let back = arcmin_to_logmar(x).unwrap().to_arcmin().unwrap().value();
            prop_assert!(((back - x) / x).abs() < 1e-12);
        }
    }
}
