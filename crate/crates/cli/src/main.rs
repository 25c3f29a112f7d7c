//! `fbmnc`: reproduces the backlog, delay and simulation figures as CSV
//! tables with gnuplot scripts.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::commands::Run;
use crate::config::ScenarioConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible scenario: {0}")]
    Infeasible(String),
    #[error("resource guard: {0}")]
    Resource(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Resource(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Envelopes and point-wise overflow probabilities over time.
    Envelope,
    /// Backlog bounds over b, or the backlog at a fixed ε over a parameter.
    Backlog,
    /// fBm and EBB backlog tails on a common axis.
    TailCompare,
    /// Single-hop delay violation probability over the cross Hurst parameter.
    Delay,
    /// End-to-end delay bounds over the number of hops.
    E2e,
    /// Monte-Carlo envelope violation frequencies against the bounds.
    Simulate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Envelope => "envelope",
            Command::Backlog => "backlog",
            Command::TailCompare => "tail-compare",
            Command::Delay => "delay",
            Command::E2e => "e2e",
            Command::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "fbmnc", version, about = "Statistical network calculus bounds under fBm cross traffic")]
struct Cli {
    /// Command to run; falls back to `command` in the config file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for Monte-Carlo runs; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte-Carlo paths; overrides `simulate.trials`.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = ScenarioConfig::load(&cli.config)?;
    let command = match (cli.command, cfg.command.as_deref()) {
        (Some(c), _) => c,
        (None, Some(name)) => Command::from_str(name, true)
            .map_err(|_| CliError::Config(format!("unknown command {name:?}")))?,
        (None, None) => return Err(CliError::Config("no command given".into())),
    };
    let Format::Csv = cli.format;
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Io(format!("{}: {e}", cli.out.display())))?;
    let run = Run {
        cfg: &cfg,
        out: &cli.out,
        stem: cfg.output.prefix.clone().unwrap_or_else(|| command.name().to_string()),
        seed: cli.seed.or(cfg.seed).unwrap_or(1),
        trials: cli.trials,
    };
    match command {
        Command::Envelope => commands::envelope(&run),
        Command::Backlog => commands::backlog(&run),
        Command::TailCompare => commands::tail_compare(&run),
        Command::Delay => commands::delay(&run),
        Command::E2e => commands::e2e(&run),
        Command::Simulate => commands::simulate(&run),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fbmnc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
