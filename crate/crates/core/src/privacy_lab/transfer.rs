//! Delivery and uniformity of the stand-alone masked transfer.

use serde::Serialize;

use super::stats::{chi_square_uniform, ChiSquareTest};
use super::Verdict;
use crate::engine::{run_trials, Execution, Scheduler, Streams};
use crate::subroutines::{Label, P2PInput, P2PTransfer};
use crate::{Error, Modulus, Result};

/// One chi-square test per kind of value the Sender shows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmittedValue {
    pub name: String,
    pub samples: u64,
    pub test: ChiSquareTest,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferReport {
    pub n: usize,
    pub k: u8,
    pub secret: u8,
    pub trials: u64,
    pub delivered: u64,
    pub emitted: Vec<EmittedValue>,
    /// Leaks if a delivery failed or any emitted value fails uniformity at
    /// the 0.001 level.
    pub verdict: Verdict,
}

/// Significance level of the uniformity tests.
pub const UNIFORMITY_ALPHA: f64 = 0.001;

#[derive(Default)]
struct Sample {
    refresh: Option<u8>,
    mask: Option<u8>,
    masked: Option<u8>,
    delivered: bool,
}

/// Runs `trials` transfers of `secret` from agent 0 to the only eligible
/// agent (`n-1`); all other agents are already visited. Records the first
/// mask a visited agent sees, the mask the receiver sees, and the masked
/// value the receiver sees.
pub fn p2p_uniformity(
    k: Modulus,
    n: usize,
    secret: u8,
    trials: u64,
    streams: &Streams,
) -> Result<TransferReport> {
    if n < 3 {
        return Err(Error::InvalidPopulation(n));
    }
    if !k.contains(secret) {
        return Err(Error::InvalidInput(format!("secret {secret} outside Z_{}", k.get())));
    }
    let proto = P2PTransfer::new(k);
    let budget = 1000 * (n * n) as u64;
    let samples = run_trials(streams, trials, |_, s| -> Result<Sample> {
        let inputs: Vec<P2PInput> = (0..n)
            .map(|j| match j {
                0 => P2PInput::Sender(secret),
                j if j == n - 1 => P2PInput::Unvisited,
                _ => P2PInput::Visited,
            })
            .collect();
        let mut exec = Execution::new(&proto, inputs, &s)?;
        let mut sched = Scheduler::new(n, s.aux(1))?;
        let mut out = Sample::default();
        for _ in 0..budget {
            let (i, j) = sched.next_pair();
            let (a, b) = (exec.agents()[i].message, exec.agents()[j].message);
            let sender = [(a, b), (b, a)].into_iter().find(|(x, _)| x.label.is_token());
            if let Some((x, y)) = sender {
                match (x.label, y.label) {
                    (Label::Sender, Label::Visited) if out.refresh.is_none() => out.refresh = x.r,
                    (Label::Sender, Label::Unvisited) if a.label == Label::Sender => out.mask = x.r,
                    (Label::SenderPrime, Label::Receiver) if b.label == Label::Receiver => {
                        out.masked = x.r
                    }
                    _ => {}
                }
            }
            exec.interact(i, j)?;
            let receiver = &exec.agents()[n - 1];
            if receiver.message.label == Label::Sender {
                out.delivered = receiver.hidden == Some(secret);
                break;
            }
        }
        Ok(out)
    });
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let delivered = samples.iter().filter(|s| s.delivered).count() as u64;
    let mut emitted = Vec::new();
    let kinds: [(&str, fn(&Sample) -> Option<u8>); 3] = [
        ("refresh-mask", |s| s.refresh),
        ("send-mask", |s| s.mask),
        ("masked-value", |s| s.masked),
    ];
    for (name, pick) in kinds {
        let values: Vec<u8> = samples.iter().filter_map(pick).collect();
        let test = chi_square_uniform(&values, k)?;
        emitted.push(EmittedValue { name: name.to_string(), samples: values.len() as u64, test });
    }
    let uniform = emitted.iter().all(|e| e.test.p_value > UNIFORMITY_ALPHA);
    Ok(TransferReport {
        n,
        k: k.get(),
        secret,
        trials,
        delivered,
        emitted,
        verdict: if uniform && delivered == trials { Verdict::NoEvidence } else { Verdict::Leaks },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_experiment_delivers_uniform_values() {
        let k = Modulus::new(4).unwrap();
        let report = p2p_uniformity(k, 4, 3, 2000, &Streams::new(21)).unwrap();
        assert_eq!(report.delivered, 2000);
        assert_eq!(report.emitted.len(), 3);
        assert_eq!(report.emitted[1].samples, 2000);
        assert_eq!(report.emitted[2].samples, 2000);
        assert_eq!(report.verdict, Verdict::NoEvidence);
    }

    #[test]
    fn rejects_bad_setup() {
        let k = Modulus::new(4).unwrap();
        assert!(p2p_uniformity(k, 2, 0, 10, &Streams::new(1)).is_err());
        assert!(p2p_uniformity(k, 4, 4, 10, &Streams::new(1)).is_err());
    }
}
