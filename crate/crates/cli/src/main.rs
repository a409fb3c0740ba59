use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vqgo_cli::{run, RunOptions, RunSummary};

/// Variational synthesis of quantum gates from fixed hardware sources.
#[derive(Debug, Parser)]
#[command(name = "vqgo", version)]
struct Args {
    /// Experiment configuration (JSON).
    #[arg(long, required_unless_present = "verify", conflicts_with = "verify")]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; overrides the config's `output`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Recompute and check the infidelities stored in an artifact.
    #[arg(long)]
    verify: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = RunOptions {
        config: args.config,
        seed: args.seed,
        workers: args.workers,
        output: args.output,
        verify: args.verify,
    };
    match run(&opts) {
        Ok(RunSummary::Wrote { path, flagged_rows }) => {
            if flagged_rows > 0 {
                eprintln!("warning: {flagged_rows} row(s) flagged as aborted");
            }
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Ok(RunSummary::Verified { path, report }) => {
            println!(
                "verified {}: {} rows checked, {} skipped, max |diff| {:e}",
                path.display(),
                report.rows_checked,
                report.rows_skipped,
                report.max_abs_diff
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
