use super::{ExamConfig, ExamResult, Oracle, ResultFlag};
use crate::belief::Observation;
use crate::error::{Error, Result};
use crate::policy::{fract_acuity, fract_mle, fract_next_size};
use crate::units::Arcmin;

/// FrACT: refit the logistic by maximum likelihood after every answer and
/// show its steepest point next. The first letter is the prior-mode size.
pub fn run_fract<O: Oracle + ?Sized>(oracle: &mut O, cfg: &ExamConfig) -> Result<ExamResult> {
    cfg.validate()?;
    let c = cfg.guess_rate();
    let bounds = &cfg.size_bounds;
    let mut trace: Vec<Observation> = Vec::with_capacity(cfg.max_questions);
    let (mut size, _) = bounds.clamp(10f64.powf(cfg.prior.mode_logmar().value()));

    for step in 0..cfg.max_questions {
        let correct = oracle.respond(size).map_err(|message| Error::Oracle {
            message,
            partial: trace.clone(),
        })?;
        trace.push(Observation::new(size, correct));
        if step + 1 < cfg.max_questions {
            let fit = fract_mle(&trace, c, bounds)?;
            size = bounds.clamp(fract_next_size(&fit.params).value()).0;
        }
    }

    if trace.is_empty() {
        return Ok(ExamResult {
            predicted_k1: size,
            confidence: 0.0,
            questions_asked: 0,
            trace,
            converged: true,
            flag: None,
        });
    }
    let fit = fract_mle(&trace, c, bounds)?;
    let (predicted, clamped): (Arcmin, bool) = fract_acuity(&fit.params, cfg.tau, bounds);
    Ok(ExamResult {
        predicted_k1: predicted,
        confidence: 0.0,
        questions_asked: trace.len(),
        trace,
        converged: true,
        flag: (fit.boundary || clamped).then_some(ResultFlag::Boundary),
    })
}
