//! Step-by-step invariant checks on whole executions. Every check returns
//! [`Error::InvariantViolation`] at the first offending step.

use serde::Serialize;

use crate::engine::{
    replay_view, select_pair, AgentRng, Capture, Execution, Protocol, StateOf, Streams,
};
use crate::privacy_lab::{chi_square_counts, ChiSquareTest};
use crate::protocols::{conserved_ledger, Alg1, Alg3, Alg3State};
use crate::subroutines::Label;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AuditSummary {
    pub steps: u64,
    pub converged: bool,
}

fn violation(step: u64, what: String) -> Error {
    Error::InvariantViolation(format!("step {step}: {what}"))
}

/// Runs up to `budget` steps (stopping at convergence), checking after each
/// step that no agent other than the two scheduled ones changed, then
/// `check(before, after, step)`.
pub fn audit_run<P, F>(exec: &mut Execution<'_, P>, budget: u64, mut check: F) -> Result<AuditSummary>
where
    P: Protocol,
    F: FnMut(&[StateOf<P>], &[StateOf<P>], u64) -> Result<()>,
{
    let mut converged = exec.is_converged();
    while !converged && exec.steps() < budget {
        let before: Vec<StateOf<P>> = exec.agents().to_vec();
        let rec = exec.step()?;
        let after = exec.agents();
        for (j, (b, a)) in before.iter().zip(after).enumerate() {
            if !rec.involves(j) && b != a {
                return Err(violation(rec.step, format!("bystander {j} changed")));
            }
        }
        check(&before, after, rec.step)?;
        converged = exec.is_converged();
    }
    Ok(AuditSummary { steps: exec.steps(), converged })
}

/// Alg1: the residue sum (decided agents counting 0) never changes.
pub fn audit_alg1(alg: &Alg1, inputs: Vec<u8>, streams: &Streams, budget: u64) -> Result<AuditSummary> {
    alg.params.check_inputs(&inputs)?;
    let expected = alg.params.k.sum(inputs.iter().copied());
    let mut exec = Execution::new(alg, inputs, streams)?;
    audit_run(&mut exec, budget, |_, after, step| {
        let sum = alg.value_sum(after);
        if sum != expected {
            return Err(violation(step, format!("residue sum {sum}, expected {expected}")));
        }
        Ok(())
    })
}

/// Alg3: exactly one token holder, constant ledger, the "secret is held"
/// invariant, and visited labels that only disappear through the leader's
/// single reopening.
pub fn audit_alg3(
    alg: &Alg3,
    values: &[u8],
    leader: usize,
    streams: &Streams,
    budget: u64,
) -> Result<AuditSummary> {
    alg.params.check_inputs(values)?;
    let k = alg.params.k;
    let mut exec = Execution::new(alg, Alg3::inputs(values, leader)?, streams)?;
    let ledger = conserved_ledger(exec.agents(), k);
    let mut reopened = false;
    check_alg3_config(exec.agents(), 0)?;
    audit_run(&mut exec, budget, |before, after, step| {
        check_alg3_config(after, step)?;
        let now = conserved_ledger(after, k);
        if now != ledger {
            return Err(violation(step, format!("ledger {now}, expected {ledger}")));
        }
        let visited = |c: &[Alg3State]| c.iter().filter(|a| a.message.label == Label::Visited).count();
        if visited(after) < visited(before) {
            let reopening = before
                .iter()
                .zip(after)
                .any(|(b, a)| b.message.leader && b.message.label == Label::Visited && a.message.label == Label::Unvisited);
            if !reopening || reopened || visited(after) + 1 != visited(before) {
                return Err(violation(step, "visited label lost".to_string()));
            }
            reopened = true;
        }
        Ok(())
    })
}

fn check_alg3_config(agents: &[Alg3State], step: u64) -> Result<()> {
    let tokens = agents.iter().filter(|a| a.message.label.is_token()).count();
    if tokens != 1 {
        return Err(violation(step, format!("{tokens} token holders")));
    }
    let leaders = agents.iter().filter(|a| a.message.leader).count();
    if leaders != 1 {
        return Err(violation(step, format!("{leaders} leaders")));
    }
    for (j, a) in agents.iter().enumerate() {
        let blank = matches!(a.message.label, Label::Visited | Label::SenderPrime);
        if a.hidden.mu.is_none() != blank {
            return Err(violation(step, format!("agent {j} secret/label mismatch")));
        }
    }
    Ok(())
}

/// Replays every agent's captured view through the transition function
/// and compares with the state the execution produced.
pub fn audit_view_sufficiency<P: Protocol>(
    protocol: &P,
    inputs: Vec<P::Input>,
    streams: &Streams,
    steps: u64,
) -> Result<()> {
    let mut exec = Execution::new(protocol, inputs, streams)?.capture(Capture::All);
    for _ in 0..steps {
        exec.step()?;
    }
    for j in 0..exec.n() {
        let view = exec.view(j).expect("all views are captured");
        let mut rng: AgentRng = streams.transition(j);
        let replayed = replay_view(protocol, view, &mut rng)?;
        if replayed.last() != Some(&exec.agents()[j]) {
            return Err(violation(exec.steps(), format!("view of agent {j} does not replay")));
        }
    }
    Ok(())
}

/// Every scheduled pair is ordered, distinct and in range.
pub fn audit_scheduler(n: usize, draws: u64, rng: &mut AgentRng) -> Result<()> {
    for step in 1..=draws {
        let (i, j) = select_pair(n, rng)?;
        if i == j || i >= n || j >= n {
            return Err(violation(step, format!("bad pair ({i}, {j})")));
        }
    }
    Ok(())
}

/// Chi-square of ordered-pair frequencies against the uniform law on the
/// `n(n-1)` ordered pairs.
pub fn scheduler_uniformity(n: usize, draws: u64, rng: &mut AgentRng) -> Result<ChiSquareTest> {
    let mut counts = vec![0u64; n * n];
    for _ in 0..draws {
        let (i, j) = select_pair(n, rng)?;
        counts[i * n + j] += 1;
    }
    let off_diagonal: Vec<u64> = (0..n * n).filter(|c| c / n != c % n).map(|c| counts[c]).collect();
    chi_square_counts(&off_diagonal)
}
