//! Wire types. Sizes travel in arcmin with a logMAR mirror.

use acuity_core::exam::{ExamConfig, ExamResult, ResultFlag};
use acuity_core::Arcmin;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    /// Fixes every random choice of the session; drawn fresh when absent.
    pub seed: Option<u64>,
    #[serde(default)]
    pub config: ExamConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitResponse {
    pub step: usize,
    /// Index of the optotype the patient picked.
    pub chosen: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Size {
    pub size_arcmin: f64,
    pub size_logmar: f64,
}

impl From<Arcmin> for Size {
    fn from(a: Arcmin) -> Self {
        Size {
            size_arcmin: a.value(),
            size_logmar: a.to_logmar().value(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub step: usize,
    #[serde(flatten)]
    pub size: Size,
    /// Which optotype to draw, in `0..optotype_count`.
    pub optotype: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub seed: u64,
    pub optotype_count: u32,
    pub questions_asked: usize,
    pub finished: bool,
    /// Set when recovery dropped unreadable log lines.
    pub recovered_with_loss: bool,
    pub next: Option<Question>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseReply {
    pub step: usize,
    pub correct: bool,
    pub finished: bool,
    pub next: Option<Question>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefView {
    pub questions_asked: usize,
    pub map_arcmin: f64,
    pub map_logmar: f64,
    /// Posterior mass within the configured relative band around the mode.
    pub confidence: f64,
    pub quantiles: Vec<QuantileView>,
    pub histogram: HistogramView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileView {
    pub q: f64,
    pub size_arcmin: f64,
    pub size_logmar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramView {
    pub lo_logmar: f64,
    pub hi_logmar: f64,
    pub mass: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: usize,
    pub size_arcmin: f64,
    pub size_logmar: f64,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultView {
    pub predicted_arcmin: f64,
    pub predicted_logmar: f64,
    /// Snellen denominator at 20 feet.
    pub snellen_20ft: f64,
    pub confidence: f64,
    pub questions_asked: usize,
    pub converged: bool,
    pub flag: Option<ResultFlag>,
    pub trace: Vec<TraceEntry>,
}

impl From<&ExamResult> for ResultView {
    fn from(r: &ExamResult) -> Self {
        ResultView {
            predicted_arcmin: r.predicted_k1.value(),
            predicted_logmar: r.predicted_logmar().value(),
            snellen_20ft: r.predicted_k1.snellen_denominator_20ft(),
            confidence: r.confidence,
            questions_asked: r.questions_asked,
            converged: r.converged,
            flag: r.flag,
            trace: r
                .trace
                .iter()
                .enumerate()
                .map(|(step, o)| TraceEntry {
                    step,
                    size_arcmin: o.size.value(),
                    size_logmar: o.size.to_logmar().value(),
                    correct: o.correct,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}
