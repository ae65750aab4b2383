//! Experiment driver for `popsim`. Each subcommand resolves its flags into
//! an [`ExperimentConfig`], runs a seeded experiment and writes a single
//! JSON object (or CSV rows) stamped with the config and version.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

pub use args::{AttackId, Cli, Command, CommonArgs, Format, ProtocolId};
pub use commands::{execute, fit_exponent, quantile};
pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Sim(#[from] popsim::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 1 for usage and I/O problems, 2 when an experiment hit a broken
    /// protocol invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(popsim::Error::InvariantViolation(_))
            | CliError::Sim(popsim::Error::ProtocolIncomplete(_)) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        let broken = popsim::Error::InvariantViolation("two tokens".into());
        assert_eq!(CliError::from(broken).exit_code(), 2);
        assert_eq!(CliError::from(popsim::Error::InvalidPopulation(1)).exit_code(), 1);
    }

    #[test]
    fn exponent_fit_recovers_power_law() {
        let pts: Vec<(usize, f64)> = [8usize, 16, 32, 64].iter().map(|&n| (n, 3.0 * (n as f64).powi(3))).collect();
        assert!((fit_exponent(&pts, false).unwrap() - 3.0).abs() < 1e-9);
        let pts: Vec<(usize, f64)> =
            [8usize, 16, 32].iter().map(|&n| (n, (n as f64).powi(3) * (n as f64).ln())).collect();
        assert!((fit_exponent(&pts, true).unwrap() - 3.0).abs() < 1e-9);
        assert_eq!(fit_exponent(&pts[..1], false), None);
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&xs, 0.5), 2.5);
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert_eq!(quantile(&xs, 0.25), 1.75);
    }
}
