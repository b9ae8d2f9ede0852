use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|pred - truth| / truth`, in arcmin.
pub fn relative_error(pred: f64, truth: f64) -> f64 {
    (pred - truth).abs() / truth
}

/// Mean with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStat {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MeanStat {
    /// Summed in slice order so results never depend on scheduling.
    pub fn of(values: &[f64]) -> MeanStat {
        let n = values.len();
        if n == 0 {
            return MeanStat { mean: f64::NAN, stderr: f64::NAN, n };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        MeanStat { mean, stderr, n }
    }
}

/// One line of a results table, in long (policy, x, y, stderr) form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub policy: String,
    /// Swept quantity: question budget, slip, optotype count.
    pub x: f64,
    /// Mean relative error.
    pub y: f64,
    pub stderr: f64,
    pub mean_length: f64,
    pub n: usize,
    pub failed: usize,
}

pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["policy", "x", "y", "stderr", "mean_length", "n", "failed"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.policy.clone(),
            format!("{}", r.x),
            format!("{:.6}", r.y),
            format!("{:.6}", r.stderr),
            format!("{:.3}", r.mean_length),
            r.n.to_string(),
            r.failed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::invalid("csv", e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid("csv", e.to_string())
}

/// Runs whose stated confidence fell in `[lo, hi)` and how often they were right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub mean_confidence: f64,
    pub empirical_rate: f64,
}

impl CalibrationBin {
    pub fn midpoint(&self) -> f64 {
        (self.lo + self.hi) / 2.0
    }
}

/// Equal-width bins over `[0, 1]`; confidence 1.0 lands in the top bin.
/// Empty bins are kept with `n = 0`.
pub fn calibration_bins(records: &[(f64, bool)], bins: usize) -> Vec<CalibrationBin> {
    let bins = bins.max(1);
    let mut n = vec![0usize; bins];
    let mut hits = vec![0usize; bins];
    let mut conf = vec![0.0; bins];
    for &(c, ok) in records {
        let b = ((c * bins as f64).floor() as usize).min(bins - 1);
        n[b] += 1;
        hits[b] += ok as usize;
        conf[b] += c;
    }
    (0..bins)
        .map(|b| CalibrationBin {
            lo: b as f64 / bins as f64,
            hi: (b + 1) as f64 / bins as f64,
            n: n[b],
            mean_confidence: if n[b] > 0 { conf[b] / n[b] as f64 } else { f64::NAN },
            empirical_rate: if n[b] > 0 { hits[b] as f64 / n[b] as f64 } else { f64::NAN },
        })
        .collect()
}

pub fn write_calibration_csv<W: Write>(bins: &[CalibrationBin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_lo", "bin_hi", "n", "mean_confidence", "empirical_rate"])
        .map_err(csv_err)?;
    for b in bins {
        let fmt = |v: f64| if v.is_nan() { String::new() } else { format!("{v:.6}") };
        w.write_record([
            format!("{:.1}", b.lo),
            format!("{:.1}", b.hi),
            b.n.to_string(),
            fmt(b.mean_confidence),
            fmt(b.empirical_rate),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::invalid("csv", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::snellen_to_arcmin;
    use rand::Rng;

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(2.0, 2.0), 0.0);
        assert_eq!(relative_error(1.0, 2.0), 0.5);
        let pred = snellen_to_arcmin(20.0, 110.0).unwrap().value();
        let truth = snellen_to_arcmin(20.0, 100.0).unwrap().value();
        assert!((relative_error(pred, truth) - 0.10).abs() < 1e-12);
    }

    #[test]
    fn mean_stat() {
        let s = MeanStat::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
        assert!(MeanStat::of(&[]).mean.is_nan());
    }

    #[test]
    fn synthetic_calibrated_generator_passes() {
        let mut rng = crate::rng_from_seed(77);
        let records: Vec<(f64, bool)> = (0..10_000)
            .map(|_| {
                let c = rng.gen::<f64>();
                (c, rng.gen::<f64>() < c)
            })
            .collect();
        let bins = calibration_bins(&records, 10);
        assert_eq!(bins.iter().map(|b| b.n).sum::<usize>(), 10_000);
        for b in &bins {
            assert!((b.empirical_rate - b.midpoint()).abs() < 0.03, "{b:?}");
        }
    }

    #[test]
    fn empty_bins_reported() {
        let bins = calibration_bins(&[(1.0, true), (0.95, false)], 10);
        assert_eq!(bins[9].n, 2);
        assert_eq!(bins[0].n, 0);
        assert!(bins[0].empirical_rate.is_nan());
        let mut buf = Vec::new();
        write_calibration_csv(&bins, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("bin_lo,bin_hi,n,mean_confidence,empirical_rate\n0.0,0.1,0,,\n"));
    }

    #[test]
    fn metrics_csv_header() {
        let rows = vec![MetricsRow {
            policy: "stat".into(),
            x: 20.0,
            y: 0.0691234567,
            stderr: 0.002,
            mean_length: 20.0,
            n: 1000,
            failed: 0,
        }];
        let mut buf = Vec::new();
        write_metrics_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "policy,x,y,stderr,mean_length,n,failed\nstat,20,0.069123,0.002000,20.000,1000,0\n"
        );
    }
}
