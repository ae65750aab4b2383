use serde::Serialize;

use crate::args::{AttackId, Command, CommonArgs, Format, ProtocolId};
use crate::{usage, CliResult};
use popsim::privacy_lab::cubic_budget;
use popsim::protocols::RemainderParams;

/// Fully resolved parameters of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub protocol: Option<ProtocolId>,
    pub n: usize,
    pub k: u32,
    pub r: u32,
    pub seed: u64,
    pub trials: u64,
    pub budget: u64,
    /// False when `budget` is the default `20 n^3 ln n`, which sweeps
    /// recompute for every population size.
    pub budget_explicit: bool,
    pub m: u8,
    pub p_m1: f64,
    pub adversary: usize,
    pub leader: usize,
    pub attack: Option<AttackId>,
    pub out: Option<String>,
    pub format: Format,
    pub inputs: Option<Vec<u8>>,
    pub inputs2: Option<Vec<u8>>,
    pub ns: Vec<usize>,
    pub d: Vec<f64>,
    pub feature_len: usize,
    pub adversary_input: u8,
    pub trace: Option<String>,
    pub histograms: Option<String>,
}

const DEFAULT_D: [f64; 8] = [0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
const MIN_CONVERGENCE_TRIALS: u64 = 30;

impl ExperimentConfig {
    pub fn resolve(command: &Command) -> CliResult<Self> {
        let a: &CommonArgs = command.args();
        let name = command.name();
        let protocol = match (command, a.protocol) {
            (_, Some(p)) => Some(p),
            (Command::Run(_) | Command::Convergence(_), None) => Some(ProtocolId::Alg3),
            (Command::P2pTest(_), None) => Some(ProtocolId::P2p),
            (Command::Privacy(_), None) => match a.attack {
                Some(AttackId::P2pUniformity) => Some(ProtocolId::P2p),
                Some(AttackId::Freshness) => None,
                _ => Some(ProtocolId::Alg1),
            },
            (Command::ProbeBench(_), None) => None,
        };
        let n = a
            .n
            .or(a.inputs.as_ref().map(Vec::len))
            .unwrap_or(match command {
                Command::ProbeBench(_) => 32,
                Command::P2pTest(_) => 4,
                _ => 10,
            });
        let k = a.k.unwrap_or(match command {
            Command::Convergence(_) => 3,
            _ => 4,
        });
        let r = a.r.unwrap_or(0);
        let trials = a.trials.unwrap_or(match command {
            Command::Run(_) => 1,
            Command::Convergence(_) => MIN_CONVERGENCE_TRIALS,
            Command::ProbeBench(_) => 1000,
            Command::Privacy(_) | Command::P2pTest(_) => 10_000,
        });
        let m = a.m.unwrap_or(match command {
            Command::ProbeBench(_) => 8,
            _ => 16,
        });
        let ns = match (&a.ns, a.n) {
            (Some(ns), _) => ns.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => vec![8, 16, 32, 64],
        };
        let budget = a.budget.unwrap_or(match protocol {
            Some(ProtocolId::P2p) => 1000 * (n * n) as u64,
            _ => cubic_budget(n.max(2), 20.0),
        });
        let leader = a.leader.unwrap_or(usize::from(a.adversary == 0));
        let cfg = ExperimentConfig {
            command: name.to_string(),
            protocol,
            n,
            k,
            r,
            seed: a.seed,
            trials,
            budget,
            budget_explicit: a.budget.is_some(),
            m,
            p_m1: a.p_m1.unwrap_or(0.5),
            adversary: a.adversary,
            leader,
            attack: a.attack,
            out: a.out.as_ref().map(|p| p.display().to_string()),
            format: a.format,
            inputs: a.inputs.clone(),
            inputs2: a.inputs2.clone(),
            ns,
            d: a.d.clone().unwrap_or_else(|| DEFAULT_D.to_vec()),
            feature_len: a.feature_len.unwrap_or(8),
            adversary_input: a.adversary_input.unwrap_or(0),
            trace: a.trace.as_ref().map(|p| p.display().to_string()),
            histograms: a.histograms.as_ref().map(|p| p.display().to_string()),
        };
        cfg.validate(command)?;
        Ok(cfg)
    }

    fn validate(&self, command: &Command) -> CliResult<()> {
        RemainderParams::new(self.k, self.r).map_err(|e| usage(e.to_string()))?;
        if self.n < 2 {
            return Err(usage(format!("--n must be at least 2, got {}", self.n)));
        }
        if self.m < 2 {
            return Err(usage("--m must be at least 2"));
        }
        if !(0.0..=1.0).contains(&self.p_m1) {
            return Err(usage("--p-m1 must lie in [0, 1]"));
        }
        if self.adversary >= self.n || self.leader >= self.n {
            return Err(usage("--adversary and --leader must be below --n"));
        }
        if let Some(inputs) = &self.inputs {
            if inputs.len() != self.n {
                return Err(usage(format!("{} inputs given for --n {}", inputs.len(), self.n)));
            }
        }
        match command {
            Command::Convergence(_) => {
                if self.protocol != Some(ProtocolId::Alg3) {
                    return Err(usage("convergence sweeps only support --protocol alg3"));
                }
                if self.trials < MIN_CONVERGENCE_TRIALS {
                    return Err(usage(format!(
                        "convergence needs at least {MIN_CONVERGENCE_TRIALS} trials per n"
                    )));
                }
                if self.ns.iter().any(|&n| n < 3) {
                    return Err(usage("population sizes must be at least 3"));
                }
            }
            Command::ProbeBench(_) if self.n < 8 => {
                return Err(usage("probe-bench needs --n of at least 8"));
            }
            Command::Privacy(_) => {
                let attack = self.attack.ok_or_else(|| usage("privacy needs --attack"))?;
                let ok = match attack {
                    AttackId::FirstPartner | AttackId::ViewDistribution => {
                        matches!(self.protocol, Some(ProtocolId::Alg1 | ProtocolId::Alg3))
                    }
                    AttackId::P2pUniformity => self.protocol == Some(ProtocolId::P2p),
                    AttackId::Freshness => true,
                };
                if !ok {
                    return Err(usage(format!(
                        "attack {attack:?} does not apply to protocol {:?}",
                        self.protocol
                    )));
                }
            }
            Command::P2pTest(_) if self.protocol != Some(ProtocolId::P2p) => {
                return Err(usage("p2p-test only supports --protocol p2p"));
            }
            Command::P2pTest(_) if self.n < 3 => {
                return Err(usage("p2p-test needs --n of at least 3"));
            }
            _ => {}
        }
        Ok(())
    }
}
