use serde::{Deserialize, Serialize};

use super::{ExamResult, Oracle, ResultFlag};
use crate::belief::Observation;
use crate::error::{Error, Result};
use crate::units::{snellen_to_arcmin, Arcmin};

/// ETDRS credit per letter read on the first failed line, in logMAR.
const ETDRS_LETTER_LOGMAR: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartLine {
    pub size: Arcmin,
    pub letters: u32,
}

/// Printed chart, largest line first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    lines: Vec<ChartLine>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartScoring {
    /// Size of the last line passed.
    Snellen,
    /// Last line passed, less 0.02 logMAR per letter read on the failed line.
    Etdrs,
}

impl ChartSpec {
    pub fn new(lines: Vec<ChartLine>) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::invalid("chart", "no lines"));
        }
        if lines.iter().any(|l| l.letters == 0) {
            return Err(Error::invalid("chart", "every line needs a letter"));
        }
        if lines.windows(2).any(|w| w[1].size.value() >= w[0].size.value()) {
            return Err(Error::invalid("chart", "line sizes must strictly decrease"));
        }
        Ok(ChartSpec { lines })
    }

    pub fn lines(&self) -> &[ChartLine] {
        &self.lines
    }

    /// Traditional Snellen chart, 20/200 down to 20/10.
    pub fn snellen() -> Self {
        let rows = [(200.0, 1), (100.0, 2), (70.0, 3), (50.0, 4), (40.0, 5), (30.0, 6), (25.0, 7), (20.0, 8), (15.0, 8), (13.0, 8), (10.0, 9)];
        let lines = rows
            .iter()
            .map(|&(d, letters)| ChartLine {
                size: snellen_to_arcmin(20.0, d).expect("positive"),
                letters,
            })
            .collect();
        ChartSpec::new(lines).expect("static chart is valid")
    }

    /// ETDRS: 14 lines of 5 letters from +1.0 to -0.3 logMAR.
    pub fn etdrs() -> Self {
        let lines = (0..14)
            .map(|i| ChartLine {
                size: Arcmin::new_unchecked(10f64.powf(1.0 - 0.1 * i as f64)),
                letters: 5,
            })
            .collect();
        ChartSpec::new(lines).expect("static chart is valid")
    }
}

/// Reads the chart top-down and stops after the first failed line, where a
/// line fails once more than half its letters are missed.
pub fn run_chart<O: Oracle + ?Sized>(oracle: &mut O, spec: &ChartSpec, scoring: ChartScoring) -> Result<ExamResult> {
    let mut trace = Vec::new();
    let mut last_passed: Option<usize> = None;
    let mut failed_line_correct = 0u32;
    let mut failed = false;

    for (i, line) in spec.lines.iter().enumerate() {
        let mut correct = 0;
        for _ in 0..line.letters {
            let ok = oracle.respond(line.size).map_err(|message| Error::Oracle {
                message,
                partial: trace.clone(),
            })?;
            trace.push(Observation::new(line.size, ok));
            correct += ok as u32;
        }
        let missed = line.letters - correct;
        if 2 * missed > line.letters {
            failed = true;
            failed_line_correct = correct;
            break;
        }
        last_passed = Some(i);
    }

    let (predicted, flag) = match last_passed {
        None => (spec.lines[0].size, Some(ResultFlag::Floor)),
        Some(i) => {
            let base = spec.lines[i].size;
            let flag = (!failed).then_some(ResultFlag::Ceiling);
            let score = match scoring {
                ChartScoring::Snellen => base,
                ChartScoring::Etdrs => {
                    let logmar = base.to_logmar().value() - ETDRS_LETTER_LOGMAR * failed_line_correct as f64;
                    Arcmin::new_unchecked(10f64.powf(logmar))
                }
            };
            (score, flag)
        }
    };

    Ok(ExamResult {
        predicted_k1: predicted,
        confidence: 0.0,
        questions_asked: trace.len(),
        trace,
        converged: true,
        flag,
    })
}
