//! Exam traces as JSON lines: one record per observation, then the result.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{ExamResult, ResultFlag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceRecord {
    Observation {
        step: usize,
        size_arcmin: f64,
        size_logmar: f64,
        correct: bool,
    },
    Result {
        predicted_arcmin: f64,
        predicted_logmar: f64,
        confidence: f64,
        questions_asked: usize,
        converged: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        flag: Option<ResultFlag>,
    },
}

pub fn write_trace_jsonl<W: Write>(result: &ExamResult, mut out: W) -> std::io::Result<()> {
    for (i, o) in result.trace.iter().enumerate() {
        let rec = TraceRecord::Observation {
            step: i + 1,
            size_arcmin: o.size.value(),
            size_logmar: o.size.to_logmar().value(),
            correct: o.correct,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    let rec = TraceRecord::Result {
        predicted_arcmin: result.predicted_k1.value(),
        predicted_logmar: result.predicted_logmar().value(),
        confidence: result.confidence,
        questions_asked: result.questions_asked,
        converged: result.converged,
        flag: result.flag,
    };
    serde_json::to_writer(&mut out, &rec)?;
    out.write_all(b"\n")
}

pub fn read_trace_jsonl<R: BufRead>(input: R) -> Result<Vec<TraceRecord>> {
    input
        .lines()
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|line| {
            let line = line.map_err(|e| Error::invalid("trace", e.to_string()))?;
            serde_json::from_str(&line).map_err(|e| Error::invalid("trace", e.to_string()))
        })
        .collect()
}
