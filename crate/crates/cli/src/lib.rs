//! Command-line front end: configuration parsing, subcommands and output.
//!
//! Exit status is 0 on success, 2 for invalid input, 3 when the numerics
//! fail and 1 for I/O errors. No output file is left behind on failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;

use output::{write_atomic, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] nmdecay_core::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nmdecay",
    version,
    about = "Qubit decay into structured reservoirs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound-state energy, weight and trapped population.
    BoundState(RunArgs),
    /// Amplitude trajectory and Bloch vector.
    Evolve(RunArgs),
    /// Asymptotic quantities over a parameter grid.
    Sweep(RunArgs),
    /// Concurrence and discord of a two-qubit input over time.
    Correlations(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (Command::BoundState(args)
    | Command::Evolve(args)
    | Command::Sweep(args)
    | Command::Correlations(args)) = &cli.command;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| CliError::Config(e.to_string()))?;
    let document = pool.install(|| match &cli.command {
        Command::BoundState(a) => commands::bound_state(&config::load(&a.config)?),
        Command::Evolve(a) => commands::evolve(&config::load(&a.config)?),
        Command::Sweep(a) => commands::sweep(&config::load(&a.config)?),
        Command::Correlations(a) => commands::correlations(&config::load(&a.config)?),
    })?;
    let bytes = document.render(args.format)?;
    match &args.out {
        Some(path) => write_atomic(path, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}
