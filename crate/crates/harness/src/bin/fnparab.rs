//! Command-line front end: one subcommand per run mode, with output
//! directory, worker count, and seed resolved as flag > environment >
//! config file > default.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fnparab_harness::config::{Mode, RunConfig};
use fnparab_harness::runner::{execute, Invocation};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fnparab",
    version,
    about = "Explicit solver and experiment harness for weakly coupled fully nonlinear parabolic systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration file (sectioned key = value text).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides FNPARAB_OUT and the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps; overrides FNPARAB_WORKERS and the config.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Seed for randomized checks; overrides the config.
    #[arg(long, value_name = "K")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the coupled system from configured initial data.
    Evolve(Common),
    /// Compute self-similar decay rates and profiles for the configured operators.
    Eigen(Common),
    /// Build and verify a global-existence barrier certificate.
    Certify(Common),
    /// Classify a grid of coupling exponents (p, q) in parallel.
    Sweep(Common),
    /// Run the deterministic invariant suite; nonzero exit on any failure.
    Selfcheck(Common),
}

impl Command {
    fn parts(&self) -> (Mode, &Common) {
        match self {
            Command::Evolve(c) => (Mode::Evolve, c),
            Command::Eigen(c) => (Mode::Eigen, c),
            Command::Certify(c) => (Mode::Certify, c),
            Command::Sweep(c) => (Mode::Sweep, c),
            Command::Selfcheck(c) => (Mode::Selfcheck, c),
        }
    }
}

fn env_path(name: &str) -> Option<PathBuf> {
    std::env::var_os(name).map(PathBuf::from)
}

fn env_workers() -> Result<Option<usize>> {
    match std::env::var("FNPARAB_WORKERS") {
        Ok(v) => {
            let n: usize = v
                .parse()
                .with_context(|| format!("FNPARAB_WORKERS = '{v}' is not a worker count"))?;
            if n == 0 {
                bail!("FNPARAB_WORKERS must be at least 1");
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let (mode, common) = cli.command.parts();

    let config_text = match &common.config {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => {
            if mode != Mode::Selfcheck {
                bail!("--config is required for the {} subcommand", mode.as_str());
            }
            String::new()
        }
    };
    let config = RunConfig::parse(&config_text)?;

    let out_dir = common
        .out
        .clone()
        .or_else(|| env_path("FNPARAB_OUT"))
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}", mode.as_str())));
    let workers = match common.workers {
        Some(n) if n == 0 => bail!("--workers must be at least 1"),
        Some(n) => n,
        None => match env_workers()? {
            Some(n) => n,
            None => config.workers.unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            }),
        },
    };
    let seed = common.seed.unwrap_or(config.seed);

    let status = execute(&Invocation {
        config: &config,
        config_text: &config_text,
        mode,
        out_dir: &out_dir,
        workers,
        seed,
    })?;
    print!("{}", status.summary);
    println!("outputs: {}", out_dir.display());
    Ok(status.failed)
}

fn main() -> ExitCode {
    match run() {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
