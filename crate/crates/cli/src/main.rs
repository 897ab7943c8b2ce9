//! `pinlab`: runs the numerical experiments and writes reproducible artifact bundles.
//!
//! Exit status is 0 when every check passes, 1 when a check fails or the
//! computation errors, and 2 for usage or configuration errors.

mod artifacts;
mod config;
mod error;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{Command, RunConfig};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "pinlab", version, about = "Disordered pinning and Bessel coupling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration (a previous manifest.json also works).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Sub {
    /// Renewal mass function and its decay rate.
    Renewal(Common),
    /// Free energy, μ and two-point function over disorder replicas.
    Pinning(Common),
    /// Discretized hitting law of the Bessel process, optionally c0.
    Bessel(Common),
    /// Split the gap law into an excursion part and a remainder.
    Decompose(Common),
    /// Coupling bound check.
    Couple(Common),
    /// Sweep over h and estimate the critical point.
    Sweep(Common),
    /// Write report.md for an existing output directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn resolve(cmd: Command, c: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(prev) = cfg.command {
        if prev != cmd {
            return Err(CliError::Usage(format!("config is for `{}`, not `{}`", prev.name(), cmd.name())));
        }
    }
    cfg.command = Some(cmd);
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    if c.threads.is_some() {
        cfg.threads = c.threads;
    }
    Ok(cfg)
}

fn compute(cmd: Command, c: &Common) -> CliResult<bool> {
    let cfg = resolve(cmd, c)?;
    cfg.validate()?;
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let start = Instant::now();
    let bundle = run::execute(cmd, &cfg)?;
    let dir = cfg.out_dir();
    let summary = bundle.write(&dir, &cfg, start.elapsed().as_secs_f64())?;
    for ch in &summary.checks {
        println!("{} {}: {}", if ch.pass { "PASS" } else { "FAIL" }, ch.name, ch.detail);
    }
    println!("wrote {}", dir.display());
    Ok(summary.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Sub::Renewal(c) => compute(Command::Renewal, c),
        Sub::Pinning(c) => compute(Command::Pinning, c),
        Sub::Bessel(c) => compute(Command::Bessel, c),
        Sub::Decompose(c) => compute(Command::Decompose, c),
        Sub::Couple(c) => compute(Command::Couple, c),
        Sub::Sweep(c) => compute(Command::Sweep, c),
        Sub::Report { out } => report::emit_report(out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
