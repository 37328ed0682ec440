use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use carelab::harness::{run, ExperimentConfig, Pipeline};

#[derive(Parser, Debug)]
#[command(
    name = "carelab",
    version,
    about = "Eldercare labor-supply simulator and staggered DiD lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Employment response to a parental health shock over a wealth x wage grid
    Sweep(Args),
    /// Generate a synthetic panel and its ground truth
    Simulate(Args),
    /// Fit the configured estimators to a panel CSV
    Estimate(Args),
    /// Repeated simulate-and-estimate runs scored against the truth
    Montecarlo(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    /// TOML experiment config
    #[arg(long)]
    config: PathBuf,
    /// Base seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config; default `out`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides the config)
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CARELAB_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (pipeline, args) = match cli.command {
        Command::Sweep(a) => (Pipeline::Sweep, a),
        Command::Simulate(a) => (Pipeline::Simulate, a),
        Command::Estimate(a) => (Pipeline::Estimate, a),
        Command::Montecarlo(a) => (Pipeline::Montecarlo, a),
    };
    let result = ExperimentConfig::load(&args.config).and_then(|mut cfg| {
        cfg.seed = args.seed.or(cfg.seed);
        cfg.jobs = args.jobs.or(cfg.jobs);
        let out = args
            .out
            .or_else(|| cfg.output.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        log::info!("running {} into {}", pipeline.as_str(), out.display());
        run(pipeline, &cfg, &out)
    });
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
