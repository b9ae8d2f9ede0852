use serde::{Deserialize, Serialize};

use super::metrics::{calibration_bins, relative_error, CalibrationBin, MeanStat, MetricsRow};
use super::patient::{sample_patient, PatientWorld, SimulatedPatient, TruePatient};
use super::seed::stream_seed;
use crate::belief::{GumbelPrior, K0RatioPrior, K1Prior};
use crate::error::{Error, Result};
use crate::exam::{run_chart, run_const, run_fract, run_stat, ChartScoring, ChartSpec, ExamConfig, ExamMode, ExamResult};
use crate::policy::PolicyKind;
use crate::vrf::ResponseModel;

/// Population and harness settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n_patients: usize,
    /// Distribution of the true `log10 k1`.
    pub truth_prior: GumbelPrior,
    pub k0_ratio: K0RatioPrior,
    /// Slip probability of the simulated patients.
    pub slip: f64,
    pub optotype_count: u32,
    /// Optotype set size used by the printed charts.
    pub chart_optotypes: u32,
    pub tau: f64,
    pub master_seed: u64,
    pub world: PatientWorld,
    /// Template for every StAT and FrACT exam.
    pub exam: ExamConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_patients: 1000,
            truth_prior: GumbelPrior {
                mu: 2f64.log10(),
                beta: 0.3,
                ..Default::default()
            },
            k0_ratio: K0RatioPrior::default(),
            slip: 0.05,
            optotype_count: 4,
            chart_optotypes: 19,
            tau: 0.8,
            master_seed: 2020,
            world: PatientWorld::FlooredExponential,
            exam: ExamConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_patients == 0 {
            return Err(Error::invalid("n_patients", "need at least one patient"));
        }
        self.truth_prior.validate()?;
        self.k0_ratio.validate()?;
        if !(0.0..=0.5).contains(&self.slip) {
            return Err(Error::invalid("slip", format!("{} outside [0, 0.5]", self.slip)));
        }
        if self.optotype_count < 2 || self.chart_optotypes < 2 {
            return Err(Error::invalid("optotype_count", "need at least two optotypes"));
        }
        crate::vrf::check_guess_and_target(1.0 / self.optotype_count as f64, self.tau)?;
        Ok(())
    }
}

/// StAT with one design decision switched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StatVariant {
    Full,
    /// Likelihood ignores slips.
    NoSlip,
    /// Show the posterior mode instead of a posterior sample.
    GreedyMap,
    /// Belief scores particles with a logistic curve.
    Logistic,
    /// Flat prior over logMAR -0.5 to 2.
    NoPrior,
    /// Gumbel prior with its mode on the patient's true acuity.
    GoodPrior { beta: f64 },
    /// Variable length, stops at 95% mass within 10%.
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Const,
    Snellen,
    Etdrs,
    Fract,
    Stat(StatVariant),
}

impl Method {
    pub const TABLE: [Method; 5] = [Method::Const, Method::Snellen, Method::Etdrs, Method::Fract, Method::Stat(StatVariant::Full)];

    pub const ABLATIONS: [Method; 5] = [
        Method::Stat(StatVariant::Full),
        Method::Stat(StatVariant::NoSlip),
        Method::Stat(StatVariant::GreedyMap),
        Method::Stat(StatVariant::Logistic),
        Method::Stat(StatVariant::NoPrior),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Const => "const",
            Method::Snellen => "snellen",
            Method::Etdrs => "etdrs",
            Method::Fract => "fract",
            Method::Stat(v) => match v {
                StatVariant::Full => "stat",
                StatVariant::NoSlip => "stat-noslip",
                StatVariant::GreedyMap => "stat-greedymap",
                StatVariant::Logistic => "stat-logistic",
                StatVariant::NoPrior => "stat-noprior",
                StatVariant::GoodPrior { .. } => "stat-goodprior",
                StatVariant::Star => "stat-star",
            },
        }
    }

    /// Exam settings for this method on one patient.
    pub fn exam_config(&self, sim: &SimConfig, questions: usize, patient: &TruePatient) -> ExamConfig {
        let mut cfg = sim.exam.clone();
        cfg.max_questions = questions;
        cfg.optotype_count = sim.optotype_count;
        cfg.tau = sim.tau;
        match self {
            Method::Fract => cfg.policy = PolicyKind::FractMaxInfo,
            Method::Stat(v) => match *v {
                StatVariant::Full => {}
                StatVariant::NoSlip => cfg.slip_model = 0.0,
                StatVariant::GreedyMap => cfg.policy = PolicyKind::GreedyMap,
                StatVariant::Logistic => cfg.response_model = ResponseModel::Logistic,
                StatVariant::NoPrior => cfg.prior = K1Prior::flat(),
                StatVariant::GoodPrior { beta } => {
                    cfg.prior = K1Prior::Gumbel(GumbelPrior {
                        mu: patient.k1().log10(),
                        beta,
                        ..Default::default()
                    })
                }
                StatVariant::Star => {
                    cfg.mode = ExamMode::star();
                    cfg.max_questions = cfg.max_questions.min(200);
                }
            },
            _ => {}
        }
        cfg
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let m = match s.to_ascii_lowercase().as_str() {
            "const" => Method::Const,
            "snellen" => Method::Snellen,
            "etdrs" => Method::Etdrs,
            "fract" => Method::Fract,
            "stat" => Method::Stat(StatVariant::Full),
            "stat-noslip" => Method::Stat(StatVariant::NoSlip),
            "stat-greedymap" => Method::Stat(StatVariant::GreedyMap),
            "stat-logistic" => Method::Stat(StatVariant::Logistic),
            "stat-noprior" => Method::Stat(StatVariant::NoPrior),
            "stat-goodprior" => Method::Stat(StatVariant::GoodPrior { beta: 0.1 }),
            "stat-star" => Method::Stat(StatVariant::Star),
            other => return Err(Error::invalid("method", format!("unknown method {other:?}"))),
        };
        Ok(m)
    }
}

/// One simulated exam, scored against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run_index: usize,
    pub truth_k1: f64,
    pub predicted_k1: f64,
    pub error: f64,
    pub length: usize,
    pub confidence: f64,
    pub converged: bool,
}

/// All runs of one method, in run-index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRuns {
    pub method: Method,
    pub outcomes: Vec<std::result::Result<RunOutcome, String>>,
}

impl MethodRuns {
    pub fn ok(&self) -> impl Iterator<Item = &RunOutcome> {
        self.outcomes.iter().filter_map(|o| o.as_ref().ok())
    }

    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_err()).count()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.ok().map(|o| o.error).collect()
    }

    pub fn error_stat(&self) -> MeanStat {
        MeanStat::of(&self.errors())
    }

    pub fn metrics(&self, x: f64) -> MetricsRow {
        let err = self.error_stat();
        let lengths: Vec<f64> = self.ok().map(|o| o.length as f64).collect();
        MetricsRow {
            policy: self.method.name().to_string(),
            x,
            y: err.mean,
            stderr: err.stderr,
            mean_length: MeanStat::of(&lengths).mean,
            n: err.n,
            failed: self.failures(),
        }
    }
}

/// Mean and stderr of `a - b` over runs that succeeded for both.
pub fn paired_difference(a: &MethodRuns, b: &MethodRuns) -> MeanStat {
    let diffs: Vec<f64> = a
        .outcomes
        .iter()
        .zip(&b.outcomes)
        .filter_map(|(x, y)| match (x, y) {
            (Ok(x), Ok(y)) => Some(x.error - y.error),
            _ => None,
        })
        .collect();
    MeanStat::of(&diffs)
}

fn run_one(method: Method, sim: &SimConfig, questions: usize, index: usize) -> Result<RunOutcome> {
    let seed = sim.master_seed;
    let i = index as u64;
    let mut patient_rng = crate::rng_from_seed(stream_seed(seed, i, "patient"));
    let mut patient = sample_patient(sim, &mut patient_rng);
    if matches!(method, Method::Snellen | Method::Etdrs) {
        patient = patient.with_optotypes(sim.chart_optotypes);
    }
    let mut oracle = SimulatedPatient {
        patient,
        rng: crate::rng_from_seed(stream_seed(seed, i, &format!("{}/responses", method.name()))),
    };
    let mut exam_rng = crate::rng_from_seed(stream_seed(seed, i, method.name()));
    let cfg = method.exam_config(sim, questions, &patient);

    let result: ExamResult = match method {
        Method::Const => run_const(&cfg.prior),
        Method::Snellen => run_chart(&mut oracle, &ChartSpec::snellen(), ChartScoring::Snellen)?,
        Method::Etdrs => run_chart(&mut oracle, &ChartSpec::etdrs(), ChartScoring::Etdrs)?,
        Method::Fract => run_fract(&mut oracle, &cfg)?,
        Method::Stat(_) => run_stat(&mut oracle, &cfg, &mut exam_rng)?,
    };
    let truth = patient.k1();
    Ok(RunOutcome {
        run_index: index,
        truth_k1: truth,
        predicted_k1: result.predicted_k1.value(),
        error: relative_error(result.predicted_k1.value(), truth),
        length: result.questions_asked,
        confidence: result.confidence,
        converged: result.converged,
    })
}

fn map_runs<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs `method` on every patient of the population.
pub fn run_method(method: Method, sim: &SimConfig, questions: usize) -> Result<MethodRuns> {
    sim.validate()?;
    let outcomes = map_runs(sim.n_patients, |i| run_one(method, sim, questions, i).map_err(|e| e.to_string()));
    let failed = outcomes.iter().filter(|o| o.is_err()).count();
    if failed > 0 {
        log::warn!("{}: {failed} of {} runs failed", method.name(), sim.n_patients);
    }
    Ok(MethodRuns { method, outcomes })
}

pub fn run_benchmark(sim: &SimConfig, methods: &[Method], questions: usize) -> Result<Vec<MetricsRow>> {
    if methods.is_empty() {
        return Err(Error::invalid("methods", "nothing to run"));
    }
    methods
        .iter()
        .map(|&m| Ok(run_method(m, sim, questions)?.metrics(questions as f64)))
        .collect()
}

pub fn run_length_sweep(sim: &SimConfig, methods: &[Method], lengths: &[usize]) -> Result<Vec<MetricsRow>> {
    if lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("lengths", "must be strictly ascending"));
    }
    let mut rows = Vec::with_capacity(methods.len() * lengths.len());
    for &m in methods {
        for &len in lengths {
            rows.push(run_method(m, sim, len)?.metrics(len as f64));
        }
    }
    Ok(rows)
}

/// Bins StAT's stated confidence (mass within 10%) against whether the
/// prediction really was within 10%.
pub fn run_calibration(sim: &SimConfig, n_runs: usize, questions: usize) -> Result<(Vec<CalibrationBin>, Vec<(f64, bool)>)> {
    if n_runs < 1000 {
        return Err(Error::invalid("n_runs", "calibration needs at least 1000 runs"));
    }
    let sim = SimConfig { n_patients: n_runs, ..sim.clone() };
    let runs = run_method(Method::Stat(StatVariant::Full), &sim, questions)?;
    let eps = sim.exam.confidence_eps;
    let records: Vec<(f64, bool)> = runs.ok().map(|o| (o.confidence, o.error < eps)).collect();
    Ok((calibration_bins(&records, 10), records))
}

pub fn run_ablations(sim: &SimConfig, questions: usize) -> Result<Vec<MetricsRow>> {
    run_benchmark(sim, &Method::ABLATIONS, questions)
}

/// Varies the slip probability of patients and exam together.
pub fn run_slip_sweep(sim: &SimConfig, slips: &[f64], questions: usize) -> Result<Vec<MetricsRow>> {
    slips
        .iter()
        .map(|&s| {
            let mut cfg = SimConfig { slip: s, ..sim.clone() };
            cfg.exam.slip_model = s;
            Ok(run_method(Method::Stat(StatVariant::Full), &cfg, questions)?.metrics(s))
        })
        .collect()
}

/// Varies the optotype set size for both patient and exam.
pub fn run_optotype_sweep(sim: &SimConfig, counts: &[u32], questions: usize) -> Result<Vec<MetricsRow>> {
    counts
        .iter()
        .map(|&n| {
            let cfg = SimConfig { optotype_count: n, ..sim.clone() };
            Ok(run_method(Method::Stat(StatVariant::Full), &cfg, questions)?.metrics(n as f64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig { n_patients: 40, ..Default::default() }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::TABLE.iter().chain(&Method::ABLATIONS) {
            assert_eq!(&m.name().parse::<Method>().unwrap(), m);
        }
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn const_row_matches_closed_form() {
        let sim = small();
        let runs = run_method(Method::Const, &sim, 20).unwrap();
        let mode = 10f64.powf(sim.exam.prior.mode_logmar().value());
        for o in runs.ok() {
            assert_eq!(o.length, 0);
            assert!((o.error - (mode - o.truth_k1).abs() / o.truth_k1).abs() < 1e-12);
        }
    }

    #[test]
    fn patients_are_shared_across_methods() {
        let sim = small();
        let a = run_method(Method::Const, &sim, 20).unwrap();
        let b = run_method(Method::Stat(StatVariant::Full), &sim, 5).unwrap();
        for (x, y) in a.ok().zip(b.ok()) {
            assert_eq!(x.truth_k1, y.truth_k1);
        }
    }

    #[test]
    fn sweep_shapes() {
        let sim = SimConfig { n_patients: 10, ..Default::default() };
        let rows = run_length_sweep(&sim, &[Method::Const, Method::Stat(StatVariant::Full)], &[5, 10]).unwrap();
        assert_eq!(rows.len(), 4);
        let single = run_length_sweep(&sim, &[Method::Stat(StatVariant::Full)], &[10]).unwrap();
        let bench = run_benchmark(&sim, &[Method::Stat(StatVariant::Full)], 10).unwrap();
        assert_eq!(single, bench);
        assert!(run_length_sweep(&sim, &[Method::Const], &[10, 5]).is_err());
        assert!(run_benchmark(&sim, &[], 10).is_err());
        assert!(run_calibration(&sim, 10, 20).is_err());
    }

    #[test]
    fn good_prior_centres_on_truth() {
        let sim = small();
        let mut rng = crate::rng_from_seed(0);
        let p = sample_patient(&sim, &mut rng);
        let cfg = Method::Stat(StatVariant::GoodPrior { beta: 0.1 }).exam_config(&sim, 20, &p);
        assert!((cfg.prior.mode_logmar().value() - p.k1().log10()).abs() < 1e-12);
    }
}
