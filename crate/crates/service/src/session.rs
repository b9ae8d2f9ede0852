//! One exam session: a StAT exam plus the optotype shown at each step.
//!
//! Everything random comes from two streams seeded by the session seed, so
//! replaying the logged responses rebuilds the exact same state.

use acuity_core::exam::{ExamConfig, ExamMode, StatExam};
use acuity_core::sim::stream_seed;
use acuity_core::{rng_from_seed, Arcmin, Rng};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::api::{BeliefView, HistogramView, QuantileView, Question, ResponseReply, ResultView, SessionView};
use crate::error::ApiError;

/// Largest particle count a client may ask for.
pub const MAX_PARTICLES: usize = 100_000;
const HISTOGRAM_RANGE: (f64, f64) = (-0.5, 2.3);
const HISTOGRAM_BINS: usize = 56;

/// Log line of a session file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Created { session_id: String, seed: u64, config: ExamConfig },
    Response { step: usize, chosen: u32 },
}

/// Seeds of the exam generator and of the optotype generator.
pub fn exam_seed(seed: u64) -> u64 {
    seed
}

fn optotype_seed(seed: u64) -> u64 {
    stream_seed(seed, 0, "optotype")
}

#[derive(Debug, Clone, Copy)]
struct Shown {
    size: Arcmin,
    optotype: u32,
}

#[derive(Debug, Clone, Copy)]
struct Answered {
    shown: Shown,
    chosen: u32,
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    seed: u64,
    exam: StatExam,
    exam_rng: Rng,
    optotype_rng: Rng,
    answered: Vec<Answered>,
    pending: Option<Shown>,
    recovered_with_loss: bool,
}

/// Outcome of submitting a response.
pub enum Submit {
    /// A new answer; the event must be persisted.
    Accepted(Box<Session>, ResponseReply),
    /// The same answer was already recorded for this step.
    Replayed(ResponseReply),
}

impl Session {
    pub fn new(id: String, seed: u64, config: ExamConfig) -> Result<Self, ApiError> {
        if config.particles > MAX_PARTICLES {
            return Err(ApiError::BadRequest(format!("particles must be at most {MAX_PARTICLES}")));
        }
        if let ExamMode::Star { cap, .. } = config.mode {
            if cap > 1000 {
                return Err(ApiError::BadRequest("star cap must be at most 1000".into()));
            }
        } else if config.max_questions > 1000 {
            return Err(ApiError::BadRequest("max_questions must be at most 1000".into()));
        }
        let mut exam_rng = rng_from_seed(exam_seed(seed));
        let exam = StatExam::new(config, &mut exam_rng)?;
        let mut s = Session {
            id,
            seed,
            exam,
            exam_rng,
            optotype_rng: rng_from_seed(optotype_seed(seed)),
            answered: Vec::new(),
            pending: None,
            recovered_with_loss: false,
        };
        s.advance()?;
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn created_event(&self) -> Event {
        Event::Created {
            session_id: self.id.clone(),
            seed: self.seed,
            config: self.exam.config().clone(),
        }
    }

    pub fn mark_recovered_with_loss(&mut self) {
        self.recovered_with_loss = true;
    }

    fn advance(&mut self) -> Result<(), ApiError> {
        self.pending = match self.exam.next_size(&mut self.exam_rng)? {
            Some(size) => {
                let optotype = self.optotype_rng.gen_range(0..self.exam.config().optotype_count);
                Some(Shown { size, optotype })
            }
            None => None,
        };
        Ok(())
    }

    fn question(&self, step: usize) -> Option<Question> {
        let shown = match self.answered.get(step) {
            Some(a) => Some(a.shown),
            None if step == self.answered.len() => self.pending,
            None => None,
        }?;
        Some(Question {
            step,
            size: shown.size.into(),
            optotype: shown.optotype,
        })
    }

    fn reply_for(&self, step: usize) -> ResponseReply {
        let a = self.answered[step];
        let next = self.question(step + 1);
        ResponseReply {
            step,
            correct: a.chosen == a.shown.optotype,
            finished: next.is_none(),
            next,
        }
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            session_id: self.id.clone(),
            seed: self.seed,
            optotype_count: self.exam.config().optotype_count,
            questions_asked: self.answered.len(),
            finished: self.pending.is_none(),
            recovered_with_loss: self.recovered_with_loss,
            next: self.question(self.answered.len()),
        }
    }

    /// Validates and applies an answer without touching `self`, so a failed
    /// write to the log leaves the live session unchanged.
    pub fn submit(&self, step: usize, chosen: u32) -> Result<Submit, ApiError> {
        let count = self.exam.config().optotype_count;
        if chosen >= count {
            return Err(ApiError::BadRequest(format!("chosen {chosen} outside 0..{count}")));
        }
        if let Some(prev) = self.answered.get(step) {
            return if prev.chosen == chosen {
                Ok(Submit::Replayed(self.reply_for(step)))
            } else {
                Err(ApiError::Conflict(format!("step {step} was already answered with {}", prev.chosen)))
            };
        }
        let Some(shown) = self.pending else {
            return Err(ApiError::Conflict("exam is finished".into()));
        };
        if step != self.answered.len() {
            return Err(ApiError::Conflict(format!("expected step {}, got {step}", self.answered.len())));
        }
        let mut next = self.clone();
        next.exam.record(shown.size, chosen == shown.optotype)?;
        next.answered.push(Answered { shown, chosen });
        next.advance()?;
        let reply = next.reply_for(step);
        Ok(Submit::Accepted(Box::new(next), reply))
    }

    pub fn belief(&self) -> Result<BeliefView, ApiError> {
        let ps = self.exam.belief();
        let (map, confidence) = self.exam.estimate()?;
        let qs = [0.05, 0.25, 0.5, 0.75, 0.95];
        let quantiles = ps
            .posterior_quantiles(&qs)?
            .into_iter()
            .zip(qs)
            .map(|(a, q)| QuantileView {
                q,
                size_arcmin: a.value(),
                size_logmar: a.to_logmar().value(),
            })
            .collect();
        let (lo, hi) = HISTOGRAM_RANGE;
        Ok(BeliefView {
            questions_asked: self.answered.len(),
            map_arcmin: map.value(),
            map_logmar: map.to_logmar().value(),
            confidence,
            quantiles,
            histogram: HistogramView {
                lo_logmar: lo,
                hi_logmar: hi,
                mass: ps.logmar_histogram(lo, hi, HISTOGRAM_BINS),
            },
        })
    }

    pub fn result(&self) -> Result<ResultView, ApiError> {
        if !self.exam.is_finished() {
            return Err(ApiError::InProgress);
        }
        Ok(ResultView::from(&self.exam.result()?))
    }

    /// Rebuilds a session from its log. Stops at the first event that does
    /// not apply and reports how many were used.
    pub fn replay(events: &[Event]) -> Result<(Session, usize), String> {
        let Some(Event::Created { session_id, seed, config }) = events.first() else {
            return Err("log does not start with a created event".into());
        };
        let mut s = Session::new(session_id.clone(), *seed, config.clone()).map_err(|e| e.to_string())?;
        let mut used = 1;
        for ev in &events[1..] {
            let Event::Response { step, chosen } = *ev else { break };
            match s.submit(step, chosen) {
                Ok(Submit::Accepted(next, _)) => s = *next,
                _ => break,
            }
            used += 1;
        }
        Ok((s, used))
    }
}
