use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gauge_reduce_cli::{run, Command};

#[derive(Parser)]
#[command(
    name = "gauge-reduce",
    version,
    about = "Gauge-orbit reduction on a truncated lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Experiment config (`key = value` lines); defaults apply when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set lattice.n=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = key_value, global = true)]
    set: Vec<(String, String)>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Run the invariant suite and write check.csv.
    Check,
    /// Evaluate the reduction Jacobian for the configured field.
    Jacobian,
    /// Feynman-Kac estimate with path diagnostics.
    Simulate,
    /// Monte Carlo against the grid solver or the Girsanov reweighting.
    CompareOracle,
}

fn key_value(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Check => Command::Check,
        Cmd::Jacobian => Command::Jacobian,
        Cmd::Simulate => Command::Simulate,
        Cmd::CompareOracle => Command::CompareOracle,
    };
    ExitCode::from(run(command, cli.config.as_deref(), &cli.set) as u8)
}
