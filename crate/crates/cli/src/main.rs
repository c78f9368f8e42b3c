//! Command-line driver: dataset generation, lifting visualization, coverage
//! analysis, equivariance measurement, training, and evaluation.
//!
//! Exit codes: 0 success, 2 usage, 3 configuration (including parameter
//! budget violations), 4 numeric failure (non-finite loss).

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "t3cen",
    about = "Color-equivariant group convolutions via double-cover lifting",
    version,
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate datasets (procedural shapes or hue-colorized digits).
    GenData(commands::gen_data::GenDataArgs),
    /// Lift an image over the HSL group and dump the stack as PPM files.
    Lift(commands::lift::LiftArgs),
    /// Coverage analysis: entropy grids and order recommendation.
    Analyze(commands::analyze::AnalyzeArgs),
    /// Equivariance and restoration error measurements.
    Equiv(commands::equiv::EquivArgs),
    /// Train a classifier on a manifest dataset.
    Train(commands::train::TrainArgs),
    /// Evaluate a checkpoint on a manifest dataset.
    Eval(commands::eval::EvalArgs),
}

/// Shared output-directory argument.
#[derive(Args, Clone)]
pub struct OutDir {
    /// Output directory; created if missing. All artifacts land here.
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Other(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Other(e.into())
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenData(args) => commands::gen_data::run(args),
        Command::Lift(args) => commands::lift::run(args),
        Command::Analyze(args) => commands::analyze::run(args),
        Command::Equiv(args) => commands::equiv::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
    }
}

fn main() -> ExitCode {
    t3cen::exec::apply_thread_cap_from_env();
    let argv = match config::merge_config_file(std::env::args().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(m) | CliError::Numeric(m) => eprintln!("error: {m}"),
                CliError::Other(err) => eprintln!("error: {err:#}"),
            }
            ExitCode::from(e.code())
        }
    }
}
