use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "popsim", version, about = "Population protocol experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute one protocol run and compare its answer with the ground truth.
    Run(CommonArgs),
    /// Step statistics of the private Remainder protocol over several n.
    Convergence(CommonArgs),
    /// Run a privacy experiment against one agent's view.
    Privacy(CommonArgs),
    /// Probe accuracy with fixed-length rounds and with the phase clock.
    ProbeBench(CommonArgs),
    /// Delivery and uniformity of the masked peer-to-peer transfer.
    P2pTest(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run(_) => "run",
            Command::Convergence(_) => "convergence",
            Command::Privacy(_) => "privacy",
            Command::ProbeBench(_) => "probe-bench",
            Command::P2pTest(_) => "p2p-test",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Run(a)
            | Command::Convergence(a)
            | Command::Privacy(a)
            | Command::ProbeBench(a)
            | Command::P2pTest(a) => a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolId {
    Alg1,
    Alg3,
    P2p,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AttackId {
    FirstPartner,
    ViewDistribution,
    P2pUniformity,
    Freshness,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by all subcommands. Unset values get per-command defaults.
#[derive(Clone, Debug, Default, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolId>,
    /// Population size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Modulus.
    #[arg(long)]
    pub k: Option<u32>,
    /// Target remainder.
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Step budget per run.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Phases per clock round.
    #[arg(long)]
    pub m: Option<u8>,
    /// Probability of the transfer rule when the unit-transfer protocol may
    /// also lower a flag.
    #[arg(long)]
    pub p_m1: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub adversary: usize,
    /// Leader index; defaults to the lowest index that is not the adversary.
    #[arg(long)]
    pub leader: Option<usize>,
    #[arg(long, value_enum)]
    pub attack: Option<AttackId>,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Comma-separated inputs; drawn uniformly from the seed if absent.
    #[arg(long, value_delimiter = ',')]
    pub inputs: Option<Vec<u8>>,
    /// Second input vector of the view-distribution test.
    #[arg(long, value_delimiter = ',')]
    pub inputs2: Option<Vec<u8>>,
    /// Population sizes of a convergence sweep.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Round-length factors of the fixed-length probe sweep.
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<f64>>,
    /// Observations per view feature.
    #[arg(long)]
    pub feature_len: Option<usize>,
    /// Input of the adversary in the first-partner attack.
    #[arg(long)]
    pub adversary_input: Option<u8>,
    /// Write the interaction trace of a run as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the two view-feature histograms of a view-distribution test
    /// as CSV files into this directory.
    #[arg(long)]
    pub histograms: Option<PathBuf>,
}
