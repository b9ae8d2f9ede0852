use serde::{Deserialize, Serialize};

use super::SizeBounds;
use crate::belief::Observation;
use crate::error::{Error, Result};
use crate::optim::nelder_mead_2d;
use crate::units::Arcmin;
use crate::vrf::{fract_logistic, FractParams, Orientation};

/// Search range for the logistic slope exponent.
pub const SLOPE_RANGE: (f64, f64) = (0.5, 20.0);
const THRESHOLD_GRID: usize = 60;
const SLOPE_GRID: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractFit {
    pub params: FractParams,
    pub log_lik: f64,
    /// History is all-correct or all-wrong, or the optimum hit the search box.
    pub boundary: bool,
}

fn log_lik(history: &[Observation], p: &FractParams) -> f64 {
    history
        .iter()
        .map(|o| {
            let v = fract_logistic(o.size, p, Orientation::Increasing).clamp(1e-12, 1.0 - 1e-12);
            if o.correct {
                v.ln()
            } else {
                (1.0 - v).ln()
            }
        })
        .sum()
}

/// Maximum-likelihood `(v0, slope)` of the increasing logistic.
///
/// The midpoint `1 / v0` is searched over the display range and the slope
/// over [`SLOPE_RANGE`]: a log grid first, then Nelder-Mead.
pub fn fract_mle(history: &[Observation], c: f64, bounds: &SizeBounds) -> Result<FractFit> {
    if history.is_empty() {
        return Err(Error::invalid("history", "FrACT needs at least one observation"));
    }
    let (t_lo, t_hi) = (bounds.min.ln(), bounds.max.ln());
    let (s_lo, s_hi) = (SLOPE_RANGE.0.ln(), SLOPE_RANGE.1.ln());
    let decode = |p: [f64; 2]| FractParams {
        v0: (-p[0].clamp(t_lo, t_hi)).exp(),
        slope: p[1].clamp(s_lo, s_hi).exp(),
        c,
    };
    let objective = |p: [f64; 2]| -log_lik(history, &decode(p));

    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..THRESHOLD_GRID {
        let t = t_lo + (t_hi - t_lo) * i as f64 / (THRESHOLD_GRID - 1) as f64;
        for j in 0..SLOPE_GRID {
            let s = s_lo + (s_hi - s_lo) * j as f64 / (SLOPE_GRID - 1) as f64;
            let v = objective([t, s]);
            if v < best.1 {
                best = ([t, s], v);
            }
        }
    }
    let step = [(t_hi - t_lo) / THRESHOLD_GRID as f64, (s_hi - s_lo) / SLOPE_GRID as f64];
    let (refined, value) = nelder_mead_2d(objective, best.0, step, 400, 1e-10);
    let (point, value) = if value <= best.1 { (refined, value) } else { best };
    let point = [point[0].clamp(t_lo, t_hi), point[1].clamp(s_lo, s_hi)];

    let all_same = history.iter().all(|o| o.correct == history[0].correct);
    let edge = 1e-6;
    let on_edge = point[0] <= t_lo + edge || point[0] >= t_hi - edge;
    Ok(FractFit {
        params: decode(point),
        log_lik: -value,
        boundary: all_same || on_edge,
    })
}

/// Steepest point of the logistic on a log-size axis: `v0 * x = 1`.
pub fn fract_next_size(params: &FractParams) -> Arcmin {
    Arcmin::new_unchecked(1.0 / params.v0)
}

/// Size where the fitted curve reaches `tau`, clamped to the display range.
pub fn fract_acuity(params: &FractParams, tau: f64, bounds: &SizeBounds) -> (Arcmin, bool) {
    bounds.clamp(params.threshold_at(tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn obs(size: f64, correct: bool) -> Observation {
        Observation::new(Arcmin::new(size).unwrap(), correct)
    }

    #[test]
    fn recovers_v0_from_synthetic_history() {
        let truth = FractParams::new(0.5, 4.0, 0.25).unwrap();
        let mut rng = crate::rng_from_seed(17);
        let history: Vec<_> = (0..200)
            .map(|_| {
                let x = 10f64.powf(-0.2 + 0.9 * rng.gen::<f64>());
                let p = fract_logistic(Arcmin::new(x).unwrap(), &truth, Orientation::Increasing);
                obs(x, rng.gen::<f64>() < p)
            })
            .collect();
        let fit = fract_mle(&history, 0.25, &SizeBounds::default()).unwrap();
        assert!((fit.params.v0 - 0.5).abs() / 0.5 < 0.10, "v0 {}", fit.params.v0);
        assert!(!fit.boundary);

        let mut audit = crate::rng_from_seed(99);
        for _ in 0..100 {
            let p = FractParams::new(10f64.powf(-2.0 + 3.0 * audit.gen::<f64>()), 0.5 + 19.5 * audit.gen::<f64>(), 0.25).unwrap();
            assert!(fit.log_lik >= log_lik(&history, &p) - 1e-9);
        }
    }

    #[test]
    fn single_answer_is_boundary() {
        let fit = fract_mle(&[obs(2.0, true)], 0.25, &SizeBounds::default()).unwrap();
        assert!(fit.boundary);
        assert!(fract_mle(&[], 0.25, &SizeBounds::default()).is_err());
    }

    // Slope of v against ln x, by central differences.
    fn log_slope(p: &FractParams, x: f64) -> f64 {
        let e = 1e-6;
        let at = |x: f64| fract_logistic(Arcmin::new(x).unwrap(), p, Orientation::Increasing);
        (at(x * (1.0 + e)) - at(x * (1.0 - e))) / (2.0 * e)
    }

    #[test]
    fn next_size_is_grid_steepest() {
        for &(v0, s) in &[(1.0, 1.0), (0.5, 1.0), (0.5, 4.0), (2.0, 0.7), (0.1, 9.0)] {
            let p = FractParams::new(v0, s, 0.25).unwrap();
            let (mut best_x, mut best) = (0.0, f64::NEG_INFINITY);
            for i in 0..200_001 {
                let x = 10f64.powf(-3.0 + 6.0 * i as f64 / 200_000.0) / v0;
                let d = log_slope(&p, x).abs();
                if d > best {
                    best = d;
                    best_x = x;
                }
            }
            let chosen = fract_next_size(&p).value();
            assert!((chosen - best_x).abs() / best_x < 1e-3, "v0 {v0} s {s}: {chosen} vs {best_x}");
        }
    }

    #[test]
    fn next_size_scales_with_v0() {
        let mut rng = crate::rng_from_seed(3);
        for _ in 0..100 {
            let s = 0.5 + 10.0 * rng.gen::<f64>();
            let v0 = 0.01 + 5.0 * rng.gen::<f64>();
            let unit = fract_next_size(&FractParams::new(1.0, s, 0.25).unwrap()).value();
            let scaled = fract_next_size(&FractParams::new(v0, s, 0.25).unwrap()).value();
            assert!((scaled - unit / v0).abs() <= 1e-12 * scaled);
            assert!(scaled.is_finite() && scaled > 0.0);
            let twice = fract_next_size(&FractParams::new(2.0 * v0, s, 0.25).unwrap()).value();
            assert!((twice - scaled / 2.0).abs() <= 1e-12 * scaled);
        }
    }

    #[test]
    fn acuity_hits_target() {
        let p = FractParams::through_threshold(3.0, 2.5, 0.25, 0.8).unwrap();
        let (x, clamped) = fract_acuity(&p, 0.8, &SizeBounds::default());
        assert!((x.value() - 3.0).abs() < 1e-12 && !clamped);
    }
}
