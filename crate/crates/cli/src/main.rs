use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use acuity_core::sim::{
    run_ablations, run_benchmark, run_calibration, run_length_sweep, run_optotype_sweep, run_slip_sweep,
    write_calibration_csv, write_metrics_csv, Method, SimConfig,
};
use anyhow::Context;
use clap::{Args, Parser, Subcommand};

mod config;

use config::FileConfig;

/// Simulated-patient experiments for the adaptive acuity exam.
#[derive(Debug, Parser)]
#[command(name = "acuity", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Master seed; every run derives its own stream from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of simulated patients.
    #[arg(long)]
    patients: Option<usize>,
    /// Questions per exam.
    #[arg(long)]
    questions: Option<usize>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key/value TOML file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean relative error per method (Table 1 style).
    Benchmark {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "const,snellen,etdrs,fract,stat")]
        methods: Vec<Method>,
    },
    /// Error against exam length.
    SweepLength {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "fract,stat")]
        methods: Vec<Method>,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,50,100,200")]
        lengths: Vec<usize>,
    },
    /// Stated confidence against empirical success, binned by decile.
    Calibration {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
    },
    /// StAT with one component switched off at a time.
    Ablations {
        #[command(flatten)]
        common: Common,
    },
    /// StAT error against slip probability.
    SweepSlip {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.2,0.33,0.4")]
        slips: Vec<f64>,
    },
    /// StAT error against the number of optotype choices.
    SweepOptotypes {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "2,4,10,19,26")]
        counts: Vec<u32>,
    },
}

impl Common {
    fn sim_config(&self) -> anyhow::Result<(SimConfig, usize)> {
        let mut sim = SimConfig::default();
        let mut file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        file.seed = self.seed.or(file.seed);
        file.patients = self.patients.or(file.patients);
        file.questions = self.questions.or(file.questions);
        file.apply(&mut sim)?;
        let questions = sim.exam.max_questions;
        Ok((sim, questions))
    }

    fn output(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Benchmark { common, .. }
        | Command::SweepLength { common, .. }
        | Command::Calibration { common, .. }
        | Command::Ablations { common }
        | Command::SweepSlip { common, .. }
        | Command::SweepOptotypes { common, .. } => common,
    };
    let (sim, questions) = common.sim_config()?;
    let started = std::time::Instant::now();

    let mut out = common.output()?;
    match &cli.command {
        Command::Benchmark { methods, .. } => write_metrics_csv(&run_benchmark(&sim, methods, questions)?, &mut out)?,
        Command::SweepLength { methods, lengths, .. } => {
            write_metrics_csv(&run_length_sweep(&sim, methods, lengths)?, &mut out)?
        }
        Command::Calibration { runs, .. } => {
            let (bins, _) = run_calibration(&sim, *runs, questions)?;
            write_calibration_csv(&bins, &mut out)?
        }
        Command::Ablations { .. } => write_metrics_csv(&run_ablations(&sim, questions)?, &mut out)?,
        Command::SweepSlip { slips, .. } => write_metrics_csv(&run_slip_sweep(&sim, slips, questions)?, &mut out)?,
        Command::SweepOptotypes { counts, .. } => {
            write_metrics_csv(&run_optotype_sweep(&sim, counts, questions)?, &mut out)?
        }
    }
    out.flush()?;
    log::info!("finished in {:.1?}", started.elapsed());
    Ok(())
}
