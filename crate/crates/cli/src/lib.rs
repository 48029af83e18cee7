//! Experiment runner for the redundancy dispatching model: JSON configs in,
//! CSV tables out.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Axis, ExperimentConfig, Output};
pub use error::{CliError, CliResult};
pub use output::{format_number, Table};

#[derive(Debug, Parser)]
#[command(
    name = "redundancy",
    version,
    about = "Analyze and simulate π(p, T1, T2) dispatching"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium constants, loss probability and mean response time.
    Analytic(CommonArgs),
    /// Finite-N simulation of the base parameters.
    Simulate(CommonArgs),
    /// Evaluate the requested outputs along one parameter axis.
    Sweep(CommonArgs),
    /// Compare simulations over `n_grid` with the analytic value.
    Validate(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the simulation seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Analytic(a)
            | Command::Simulate(a)
            | Command::Sweep(a)
            | Command::Validate(a) => a,
        }
    }
}

/// Runs one command and returns its table.
pub fn execute(command: &Command) -> CliResult<Table> {
    let args = command.args();
    let config = ExperimentConfig::load(&args.config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()?;
    pool.install(|| match command {
        Command::Analytic(_) => commands::cmd_analytic(&config),
        Command::Simulate(_) => commands::cmd_simulate(&config, args.seed),
        Command::Sweep(_) => commands::cmd_sweep(&config, args.seed),
        Command::Validate(_) => commands::cmd_validate(&config, args.seed),
    })
}

/// Runs a command end to end and maps the outcome to a process exit code.
pub fn run_cli(cli: &Cli) -> u8 {
    let result = execute(&cli.command).and_then(|t| t.write(cli.command.args().out.as_deref()));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
