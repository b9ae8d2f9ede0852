//! Virtual patients and the benchmark experiments.

mod experiments;
mod metrics;
mod patient;
mod seed;

pub use experiments::{
    paired_difference, run_ablations, run_benchmark, run_calibration, run_length_sweep, run_method, run_optotype_sweep,
    run_slip_sweep, Method, MethodRuns, RunOutcome, SimConfig, StatVariant,
};
pub use metrics::{
    calibration_bins, relative_error, write_calibration_csv, write_metrics_csv, CalibrationBin, MeanStat, MetricsRow,
};
pub use patient::{sample_patient, simulate_response, PatientWorld, SimulatedPatient, TruePatient};
pub use seed::stream_seed;
