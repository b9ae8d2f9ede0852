//! Bindings for the static demo page in `www/`. Every function takes plain
//! numbers or a JSON string and returns JSON, so the page needs no glue
//! beyond what wasm-bindgen generates.

use acuity_core::belief::{Observation, ParticleSet};
use acuity_core::exam::{ExamConfig, StatExam};
use acuity_core::sim::{simulate_response, TruePatient};
use acuity_core::vrf::{with_slip, VrfParams};
use acuity_core::{rng_from_seed, Arcmin};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

const HIST_LO: f64 = -0.5;
const HIST_HI: f64 = 2.3;
const HIST_BINS: usize = 56;

#[derive(Serialize)]
struct Curve {
    sizes: Vec<f64>,
    prob: Vec<f64>,
}

#[derive(Serialize)]
struct Posterior {
    map_arcmin: f64,
    map_logmar: f64,
    confidence: f64,
    lo_logmar: f64,
    hi_logmar: f64,
    mass: Vec<f64>,
}

#[derive(Serialize)]
struct Step {
    size_arcmin: f64,
    correct: bool,
    map_arcmin: f64,
    confidence: f64,
}

#[derive(Serialize)]
struct Simulation {
    true_arcmin: f64,
    steps: Vec<Step>,
    posterior: Posterior,
}

#[derive(Deserialize)]
struct Response {
    size_arcmin: f64,
    correct: bool,
}

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn posterior_of(exam: &StatExam) -> acuity_core::Result<Posterior> {
    let (map, confidence) = exam.estimate()?;
    Ok(Posterior {
        map_arcmin: map.value(),
        map_logmar: map.to_logmar().value(),
        confidence,
        lo_logmar: HIST_LO,
        hi_logmar: HIST_HI,
        mass: exam.belief().logmar_histogram(HIST_LO, HIST_HI, HIST_BINS),
    })
}

/// Response probability over `n` log-spaced sizes in `[lo, hi]` arcmin.
pub fn vrf_curve_json(k0: f64, k1: f64, optotypes: u32, slip: f64, lo: f64, hi: f64, n: usize) -> acuity_core::Result<String> {
    if optotypes < 2 {
        return Err(acuity_core::Error::invalid("optotypes", "need at least two"));
    }
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(acuity_core::Error::invalid("range", "need 0 < lo < hi and n >= 2"));
    }
    let c = 1.0 / optotypes as f64;
    let p = VrfParams::new(k0, k1, c, 0.8)?;
    let sizes: Vec<f64> = (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect();
    let prob = sizes.iter().map(|&x| with_slip(p.prob(x), slip, c)).collect();
    Ok(serde_json::to_string(&Curve { sizes, prob }).expect("plain data"))
}

/// Runs a StAT exam against a simulated patient and returns every step.
pub fn simulate_exam_json(seed: u64, k0: f64, k1: f64, questions: usize, slip: f64) -> acuity_core::Result<String> {
    let cfg = ExamConfig {
        max_questions: questions,
        ..Default::default()
    };
    let patient = TruePatient {
        params: VrfParams::new(k0, k1, cfg.guess_rate(), cfg.tau)?,
        slip,
        logistic: None,
    };
    let mut rng = rng_from_seed(seed);
    let mut patient_rng = rng_from_seed(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut exam = StatExam::new(cfg, &mut rng)?;
    let mut steps = Vec::new();
    while let Some(size) = exam.next_size(&mut rng)? {
        let correct = simulate_response(&patient, size, &mut patient_rng);
        exam.record(size, correct)?;
        let (map, confidence) = exam.estimate()?;
        steps.push(Step {
            size_arcmin: size.value(),
            correct,
            map_arcmin: map.value(),
            confidence,
        });
    }
    let out = Simulation {
        true_arcmin: k1,
        steps,
        posterior: posterior_of(&exam)?,
    };
    Ok(serde_json::to_string(&out).expect("plain data"))
}

/// Posterior after a list of `{size_arcmin, correct}` answers.
pub fn posterior_json(responses: &str, seed: u64) -> Result<String, String> {
    let responses: Vec<Response> = serde_json::from_str(responses).map_err(|e| e.to_string())?;
    let cfg = ExamConfig::default();
    let mut rng = rng_from_seed(seed);
    let mut ps = ParticleSet::from_prior(&cfg.prior, &cfg.k0_ratio, cfg.particles, &mut rng).map_err(|e| e.to_string())?;
    let lik = acuity_core::belief::Likelihood::new(cfg.response_model, cfg.guess_rate(), cfg.tau, cfg.slip_model);
    for r in &responses {
        let size = Arcmin::new(r.size_arcmin).map_err(|e| e.to_string())?;
        ps.update(&Observation::new(size, r.correct), &lik).map_err(|e| e.to_string())?;
    }
    let map = ps.posterior_map().map_err(|e| e.to_string())?;
    let out = Posterior {
        map_arcmin: map.value(),
        map_logmar: map.to_logmar().value(),
        confidence: ps.credible_mass(map, cfg.confidence_eps),
        lo_logmar: HIST_LO,
        hi_logmar: HIST_HI,
        mass: ps.logmar_histogram(HIST_LO, HIST_HI, HIST_BINS),
    };
    Ok(serde_json::to_string(&out).expect("plain data"))
}

#[wasm_bindgen(js_name = vrfCurve)]
pub fn vrf_curve(k0: f64, k1: f64, optotypes: u32, slip: f64, lo: f64, hi: f64, n: usize) -> Result<String, JsError> {
    vrf_curve_json(k0, k1, optotypes, slip, lo, hi, n).map_err(err)
}

#[wasm_bindgen(js_name = simulateExam)]
pub fn simulate_exam(seed: u32, k0: f64, k1: f64, questions: usize, slip: f64) -> Result<String, JsError> {
    simulate_exam_json(seed as u64, k0, k1, questions, slip).map_err(err)
}

#[wasm_bindgen(js_name = posterior)]
pub fn posterior(responses: &str, seed: u32) -> Result<String, JsError> {
    posterior_json(responses, seed as u64).map_err(err)
}
