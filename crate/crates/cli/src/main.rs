use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use goblend_core::demos::generate_synthetic;
use goblend_core::{run_suite, Simulator, SuiteConfig, SuiteOptions, SyntheticConfig, TrackSpec};

#[derive(Debug, Parser)]
#[command(name = "goblend", version, about = "Affect-driven Go-Explore on a deterministic racing game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment suite and write its output tree.
    Run(RunArgs),
    /// Generate a synthetic demonstration dataset.
    GenData(GenDataArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Suite configuration (JSON); the built-in suite when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Runs per experiment.
    #[arg(long)]
    runs: Option<u32>,
    /// Iterations per Go-Blend run.
    #[arg(long)]
    iterations: Option<u64>,
    /// Run only the named experiment; repeatable.
    #[arg(long)]
    only: Vec<String>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    /// Track file; the built-in track when omitted.
    #[arg(long)]
    track: Option<PathBuf>,
    #[arg(long, default_value_t = 27)]
    sessions: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn run(args: RunArgs) -> goblend_core::Result<()> {
    let config = match &args.config {
        Some(path) => SuiteConfig::load(path)?,
        None => SuiteConfig::default(),
    };
    let options = SuiteOptions {
        seed: args.seed,
        runs: args.runs,
        iterations: args.iterations,
        only: args.only,
        jobs: args.jobs,
    };
    let report = run_suite(config, &options, &args.out)?;
    log::info!(
        "{} runs of {} experiments written to {}",
        report.results.len(),
        report.aggregates.len(),
        args.out.display()
    );
    Ok(())
}

fn gen_data(args: GenDataArgs) -> goblend_core::Result<()> {
    let sim = match &args.track {
        Some(path) => Simulator::new(TrackSpec::load(path)?)?,
        None => Simulator::default_track(),
    };
    let config = SyntheticConfig { sessions: args.sessions, ..SyntheticConfig::default() };
    let manifest = generate_synthetic(&sim, &config, args.seed, &args.out)?;
    log::info!("{} sessions written to {}", manifest.sessions.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::GenData(args) => gen_data(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
