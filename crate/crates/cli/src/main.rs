//! `lineguard`: corpus building, guarded generation, benchmarking and
//! evaluation from one JSON config.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 the run finished
//! with recorded failures, 1 outputs could not be written.

mod commands;
mod config;
mod error;
mod manifest;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lineguard_core::guard::Policy;

use config::Overrides;
use error::CliResult;

#[derive(Parser)]
#[command(name = "lineguard", version, about = "Line-level semantic supervision for code generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build labeled prefix fragments from paired submissions.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Run guarded generation, one session per task.
    Guard {
        #[command(subcommand)]
        action: GuardAction,
    },
    /// Compare rollback policies on the same tasks and seeds.
    Bench {
        #[command(subcommand)]
        action: BenchAction,
    },
    /// Evaluate results files.
    Eval {
        #[command(subcommand)]
        action: EvalAction,
    },
    /// Measure evaluator accuracy and loss on a fragment corpus.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        /// Fragment JSONL, e.g. a split written by `corpus build`.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    Build {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GuardAction {
    Run(RunArgs),
}

#[derive(Subcommand)]
enum BenchAction {
    Compare(RunArgs),
}

#[derive(Subcommand)]
enum EvalAction {
    Passk {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: u64,
        /// Defaults to the directory holding the results file.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    tasks: Option<PathBuf>,
    /// Policy name; `bench compare` accepts a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    policy: Option<Vec<Policy>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            policy: self.policy.clone(),
            seed: self.seed,
            jobs: self.jobs,
            out_dir: self.out_dir.clone(),
            tasks: self.tasks.clone(),
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Corpus { action: CorpusAction::Build { config, jobs, out_dir } } => {
            commands::corpus::build(&config, &Overrides { jobs, out_dir, ..Default::default() })
        }
        Command::Guard { action: GuardAction::Run(args) } => {
            if args.policy.as_ref().is_some_and(|p| p.len() > 1) {
                return Err(error::CliError::config("guard run takes a single --policy"));
            }
            commands::guard::run(&args.config, &args.overrides())
        }
        Command::Bench { action: BenchAction::Compare(args) } => commands::bench::run(&args.config, &args.overrides()),
        Command::Eval { action: EvalAction::Passk { results, k, out_dir } } => commands::eval::passk(&results, k, out_dir),
        Command::Calibrate { config, corpus, jobs, out_dir } => {
            commands::calibrate::run(&config, &corpus, &Overrides { jobs, out_dir, ..Default::default() })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
