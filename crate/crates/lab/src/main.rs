use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod error;
mod run;

use config::{Experiment, ExperimentConfig};
use error::LabError;

/// Runs group-theory experiments described by JSON configs.
#[derive(Parser)]
#[command(name = "lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config and print diagnostics (one per line) without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run an experiment: census, genericity, conjugacy, barriers, contraction, paths or bbf.
    #[command(external_subcommand)]
    Run(Vec<String>),
}

#[derive(Parser)]
#[command(name = "lab <experiment>")]
struct RunArgs {
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; overrides the config and LAB_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Output path prefix; defaults to the config's `output`.
    #[arg(long)]
    out: Option<String>,
    /// Also write a gnuplot script for the main CSV.
    #[arg(long)]
    gnuplot: bool,
}

fn read(path: &PathBuf) -> Result<String, LabError> {
    fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
}

fn validate(path: &PathBuf) -> Result<i32, LabError> {
    let problems = ExperimentConfig::validate_text(&read(path)?);
    for p in &problems {
        println!("{p}");
    }
    Ok(if problems.is_empty() { 0 } else { 2 })
}

fn run_experiment(args: RunArgs) -> Result<i32, LabError> {
    let experiment =
        Experiment::parse(&args.experiment).ok_or_else(|| LabError::UnknownExperiment(args.experiment.clone()))?;
    let cfg = ExperimentConfig::parse(&read(&args.config)?)?;
    if cfg.params.experiment() != experiment {
        return Err(LabError::Config(format!(
            "command line asks for `{experiment}` but the config describes `{}`",
            cfg.params.experiment()
        )));
    }
    let env_threads = std::env::var("LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    if let Some(n) = args.threads.or(cfg.threads).or(env_threads) {
        if n == 0 {
            return Err(LabError::Config("threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    }
    let prefix = args.out.clone().unwrap_or_else(|| cfg.output.clone());
    let report = run::run(&cfg, &prefix, args.gnuplot)?;
    for v in &report.verdicts {
        println!("{v}");
    }
    if let Some(e) = &report.error {
        eprintln!("lab: {e}");
    }
    println!("report: {prefix}.report.json");
    Ok(report.status.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => validate(&config),
        Command::Run(raw) => {
            let args = RunArgs::parse_from(std::iter::once("lab".to_string()).chain(raw));
            run_experiment(args)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
