use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid population size {0}: at least 2 agents are required")]
    InvalidPopulation(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("protocol incomplete: {0}")]
    ProtocolIncomplete(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: u64, got: u64 },
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
}

pub type Result<T> = std::result::Result<T, Error>;
