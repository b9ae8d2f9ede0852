use acuity_core::exam::{
    read_trace_jsonl, run_chart, run_fract, run_stat, write_trace_jsonl, ChartScoring, ChartSpec, ExamConfig,
    ExamMode, ResultFlag, StatExam, TraceRecord,
};
use acuity_core::sim::{sample_patient, SimConfig, SimulatedPatient};
use acuity_core::{rng_from_seed, Arcmin, VrfParams};
use rand::Rng;

fn noisy(k1: f64, seed: u64) -> impl FnMut(Arcmin) -> bool {
    let truth = VrfParams::new(0.8 * k1, k1, 0.25, 0.8).unwrap();
    let mut rng = rng_from_seed(seed);
    move |x: Arcmin| rng.gen::<f64>() < truth.prob(x.value())
}

fn sharp(k1: f64) -> impl FnMut(Arcmin) -> bool {
    move |x: Arcmin| x.value() >= k1
}

#[test]
fn stepwise_exam_matches_run_stat() {
    let cfg = ExamConfig::default();
    let whole = run_stat(&mut noisy(2.5, 4), &cfg, &mut rng_from_seed(8)).unwrap();

    let mut rng = rng_from_seed(8);
    let mut oracle = noisy(2.5, 4);
    let mut exam = StatExam::new(cfg, &mut rng).unwrap();
    while let Some(size) = exam.next_size(&mut rng).unwrap() {
        exam.record(size, oracle(size)).unwrap();
    }
    assert_eq!(exam.result().unwrap(), whole);
    assert_eq!(whole.questions_asked, 20);
}

#[test]
fn trace_round_trips_through_jsonl() {
    let result = run_stat(&mut noisy(1.5, 1), &ExamConfig::default(), &mut rng_from_seed(2)).unwrap();
    let mut buf = Vec::new();
    write_trace_jsonl(&result, &mut buf).unwrap();
    let records = read_trace_jsonl(buf.as_slice()).unwrap();
    assert_eq!(records.len(), result.trace.len() + 1);
    match records.last().unwrap() {
        TraceRecord::Result { predicted_arcmin, .. } => assert_eq!(*predicted_arcmin, result.predicted_k1.value()),
        other => panic!("expected result record, got {other:?}"),
    }
}

#[test]
fn star_mode_stops_when_confident() {
    let cfg = ExamConfig {
        mode: ExamMode::star(),
        ..Default::default()
    };
    let r = run_stat(&mut noisy(3.0, 11), &cfg, &mut rng_from_seed(12)).unwrap();
    assert!(r.converged);
    assert!(r.questions_asked < 200);
    assert!(r.confidence >= 0.95);
    assert!((r.predicted_k1.value() / 3.0 - 1.0).abs() < 0.15);
}

#[test]
fn charts_bracket_a_sharp_threshold() {
    for k1 in [1.2, 2.2, 4.5] {
        let snellen = run_chart(&mut sharp(k1), &ChartSpec::snellen(), ChartScoring::Snellen).unwrap();
        let etdrs = run_chart(&mut sharp(k1), &ChartSpec::etdrs(), ChartScoring::Etdrs).unwrap();
        for r in [&snellen, &etdrs] {
            assert!(r.flag.is_none());
            assert!(r.predicted_k1.value() >= k1);
            assert!(r.predicted_k1.value() < 1.5 * k1);
        }
    }
}

#[test]
fn chart_flags_floor_and_ceiling() {
    let blind = run_chart(&mut |_| false, &ChartSpec::snellen(), ChartScoring::Snellen).unwrap();
    assert_eq!(blind.flag, Some(ResultFlag::Floor));
    let perfect = run_chart(&mut |_| true, &ChartSpec::etdrs(), ChartScoring::Etdrs).unwrap();
    assert_eq!(perfect.flag, Some(ResultFlag::Ceiling));
}

#[test]
fn fract_locates_a_noisy_threshold() {
    let cfg = ExamConfig {
        max_questions: 200,
        ..Default::default()
    };
    let r = run_fract(&mut noisy(2.0, 21), &cfg).unwrap();
    assert_eq!(r.questions_asked, 200);
    assert!((r.predicted_k1.value() / 2.0 - 1.0).abs() < 0.2, "{}", r.predicted_k1.value());
}

#[test]
fn oracle_errors_keep_the_partial_trace() {
    let mut asked = 0;
    let mut flaky = move |_: Arcmin| -> Result<bool, String> {
        asked += 1;
        if asked > 3 {
            Err("patient left".into())
        } else {
            Ok(true)
        }
    };
    struct Flaky<F>(F);
    impl<F: FnMut(Arcmin) -> Result<bool, String>> acuity_core::exam::Oracle for Flaky<F> {
        fn respond(&mut self, size: Arcmin) -> Result<bool, String> {
            (self.0)(size)
        }
    }
    let err = run_stat(&mut Flaky(&mut flaky), &ExamConfig::default(), &mut rng_from_seed(1)).unwrap_err();
    match err {
        acuity_core::Error::Oracle { partial, .. } => assert_eq!(partial.len(), 3),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn simulated_patients_are_seed_deterministic() {
    let sim = SimConfig::default();
    let run = |seed| {
        let patient = sample_patient(&sim, &mut rng_from_seed(seed));
        let mut oracle = SimulatedPatient { patient, rng: rng_from_seed(seed + 100) };
        run_stat(&mut oracle, &ExamConfig::default(), &mut rng_from_seed(seed + 200)).unwrap()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5).trace, run(6).trace);
}
