//! Batch front end for `gauge-reduce`: config parsing, the invariant suite,
//! Jacobian reports, Feynman-Kac runs and oracle comparisons, all written
//! as CSV with a provenance line.
//!
//! Exit codes: 0 success, 1 a numerical failure recorded in the output,
//! 2 a config, input or I/O problem.

pub mod checks;
pub mod commands;
pub mod config;
pub mod fields;
pub mod output;

use std::path::{Path, PathBuf};

pub use commands::{CommandError, Outcome};
pub use config::{Config, ConfigError};

/// Caps the rayon worker count.
pub const THREADS_ENV: &str = "GAUGE_REDUCE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Jacobian,
    Simulate,
    CompareOracle,
}

pub fn execute(command: Command, cfg: &Config) -> Result<Outcome, CommandError> {
    match command {
        Command::Check => commands::check(cfg),
        Command::Jacobian => commands::jacobian(cfg),
        Command::Simulate => commands::simulate(cfg),
        Command::CompareOracle => commands::compare_oracle(cfg),
    }
}

/// Worker count from [`THREADS_ENV`]; `None` when unset.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, String> {
    match value {
        None => Ok(None),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(format!(
                "{THREADS_ENV} must be a positive integer, got {s:?}"
            )),
        },
    }
}

/// Parse, run and write; returns the process exit code.
pub fn run(command: Command, config: Option<&Path>, overrides: &[(String, String)]) -> i32 {
    let cfg = match config {
        Some(p) => Config::from_file(p, overrides),
        None => Config::parse("", overrides),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cap = match thread_cap(std::env::var(THREADS_ENV).ok().as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cap {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 2;
        }
    };
    let outcome = match pool.install(|| execute(command, &cfg)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                CommandError::Core(gauge_reduce::Error::SingularOrbitMetric(_)) => 1,
                _ => 2,
            };
        }
    };
    match write_outcome(&outcome, &cfg) {
        Ok(path) => println!("wrote {}", path.display()),
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            return 2;
        }
    }
    if outcome.success {
        0
    } else {
        eprintln!(
            "{}: failed; see {}",
            outcome.file_name,
            cfg.output_dir.join(outcome.file_name).display()
        );
        1
    }
}

pub fn write_outcome(outcome: &Outcome, cfg: &Config) -> std::io::Result<PathBuf> {
    outcome
        .table
        .write(&cfg.output_dir, outcome.file_name, cfg.hash(), outcome.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_cap_parsing() {
        assert_eq!(thread_cap(None), Ok(None));
        assert_eq!(thread_cap(Some("4")), Ok(Some(4)));
        assert!(thread_cap(Some("0")).is_err());
        assert!(thread_cap(Some("many")).is_err());
    }
}
