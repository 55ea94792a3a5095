//! `bishop --config run.json --out results/`

use std::path::PathBuf;
use std::process::ExitCode;

use bishop_core::experiment::{run, ExperimentConfig, RunOptions};
use clap::Parser;

#[derive(Debug, Parser)]
#[command(name = "bishop", version, about = "Run one Bishop disc experiment from a JSON config")]
struct Args {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; defaults to `output.dir` of the config, then `.`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for disc sweeps; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match ExperimentConfig::from_path(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bishop: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let out = args.out.clone().or_else(|| cfg.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    match run(&cfg, &out, &RunOptions { workers: args.workers, seed: args.seed }) {
        Ok(outcome) => {
            if args.verbose {
                for line in &outcome.log {
                    eprintln!("bishop: {line}");
                }
                for a in &outcome.artifacts {
                    eprintln!("bishop: wrote {}", a.display());
                }
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("bishop: self-test failed");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("bishop: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
