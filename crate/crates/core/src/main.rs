use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use beamalign::harness::{self, render_csv, render_trace_csv, ExperimentConfig, Method};
use beamalign::{selftest, Error, Result};

#[derive(Parser)]
#[command(name = "beamalign", version, about = "Beam-alignment experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized spectral efficiency against measurement count.
    SweepMeasurements(Common),
    /// Normalized spectral efficiency against SNR.
    SweepSnr(Common),
    /// One method on one channel; dumps the per-measurement trace.
    SingleRun(Common),
    /// Runs the oracle suites.
    Selftest(Common),
}

#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated, e.g. `GBRT-BO,OMP`.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "snr-db", value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    budgets: Option<Vec<usize>>,
}

impl Common {
    fn resolve(&self, mut config: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            config.load(path)?;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(t) = self.trials {
            config.trials = t;
        }
        if let Some(m) = &self.methods {
            config.methods = m.clone();
        }
        if let Some(o) = &self.out {
            config.out = Some(o.clone());
        }
        if let Some(s) = &self.snr_db {
            config.snr_db = s.clone();
        }
        if let Some(b) = &self.budgets {
            config.budgets = b.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::SweepMeasurements(c) => {
            let config = c.resolve(ExperimentConfig::measurement_sweep())?;
            info!(
                "measurement sweep: {} trials, budgets {:?}",
                config.trials, config.budgets
            );
            let points = harness::run_measurement_sweep(&config)?;
            emit(&render_csv(&points), config.out.as_ref())?;
        }
        Command::SweepSnr(c) => {
            let config = c.resolve(ExperimentConfig::snr_sweep())?;
            info!(
                "SNR sweep: {} trials, SNRs {:?}",
                config.trials, config.snr_db
            );
            let points = harness::run_snr_sweep(&config)?;
            emit(&render_csv(&points), config.out.as_ref())?;
        }
        Command::SingleRun(c) => {
            let mut base = ExperimentConfig::measurement_sweep();
            base.methods = vec![Method::GbrtBo];
            base.budgets = vec![160];
            let config = c.resolve(base)?;
            let method = config.methods[0];
            let run = harness::single_run(&config, method)?;
            info!(
                "{method} at {} dB: pair ({:.4}, {:.4}), SE {:.4} vs sweep {:.4}, normalized {:.4}",
                run.snr_db,
                run.pair.theta,
                run.pair.phi,
                run.spectral_efficiency,
                run.sweep_spectral_efficiency,
                run.normalized()?
            );
            emit(&render_trace_csv(&run.trace), config.out.as_ref())?;
        }
        Command::Selftest(c) => {
            let seed = c.seed.unwrap_or(ExperimentConfig::default().seed);
            let mut all = true;
            let mut report = String::new();
            for check in selftest::run_all(seed) {
                all &= check.passed;
                let tag = if check.passed { "PASS" } else { "FAIL" };
                report.push_str(&format!("{tag} {}: {}\n", check.name, check.detail));
            }
            emit(&report, c.out.as_ref())?;
            return Ok(all);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
