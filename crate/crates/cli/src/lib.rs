//! Command-line front end for variational gate synthesis experiments.
//!
//! A run reads one JSON [`config::ExperimentConfig`], executes the selected
//! experiment and writes a CSV table (or a JSON report for single runs)
//! whose `#` header lines record everything needed to reproduce it.
//! `--verify` recomputes the infidelities of an existing artifact.

pub mod artifact;
pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

use std::path::{Path, PathBuf};

pub use commands::{run_experiment, ExperimentOutput};
pub use config::ExperimentConfig;
pub use error::CliError;

/// Command-line options after parsing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub verify: Option<PathBuf>,
}

/// What a successful invocation did.
#[derive(Debug, Clone, PartialEq)]
pub enum RunSummary {
    Wrote { path: PathBuf, flagged_rows: usize },
    Verified { path: PathBuf, report: verify::VerifyReport },
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ExperimentConfig::from_json(&text)
}

/// `--output`, then the config's `output`, then `<kind>.csv` (`.json` for single runs).
pub fn output_path(cfg: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf).or_else(|| cfg.output.clone()).unwrap_or_else(|| {
        let ext = match cfg.experiment {
            config::Experiment::SingleOptimize(_) => "json",
            _ => "csv",
        };
        PathBuf::from(format!("{}.{ext}", cfg.experiment.kind()))
    })
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("--workers must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}"))),
    }
}

pub fn run(opts: &RunOptions) -> Result<RunSummary, CliError> {
    if let Some(path) = &opts.verify {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let report = with_workers(opts.workers, || verify::verify_text(&text))??;
        return Ok(RunSummary::Verified {
            path: path.clone(),
            report,
        });
    }
    let path = opts
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("either --config or --verify is required".into()))?;
    let mut cfg = load_config(path)?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let out_path = output_path(&cfg, opts.output.as_deref());
    let output = with_workers(opts.workers, || run_experiment(&cfg))??;
    std::fs::write(&out_path, output.render(&cfg)).map_err(|e| CliError::io(&out_path, e))?;
    Ok(RunSummary::Wrote {
        path: out_path,
        flagged_rows: output.flagged_rows(),
    })
}
