//! Generic population-protocol executor.
//!
//! A protocol splits each agent state into a hidden part and a visible
//! message. Transitions are computed locally by each of the two scheduled
//! agents from its own state and the partner's message only; the signature
//! of [`Protocol::transition`] makes it impossible to read a partner's hidden
//! part.

mod execution;
mod scheduler;
mod streams;
mod trials;
mod view;

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::Result;

pub use execution::{Convergence, Execution, RunOptions, RunReport};
pub use scheduler::{select_pair, Scheduler};
pub use streams::{AgentRng, Streams};
pub use trials::run_trials;
pub use view::{replay_view, Capture, Observation, View, ViewOf};

/// Which side of an ordered interaction an agent is on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Initiator,
    Responder,
}

/// Hidden internal part and visible message part of one agent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentState<H, M> {
    pub hidden: H,
    pub message: M,
}

impl<H, M> AgentState<H, M> {
    pub fn new(hidden: H, message: M) -> Self {
        Self { hidden, message }
    }
}

/// State type of protocol `P`.
pub type StateOf<P> = AgentState<<P as Protocol>::Hidden, <P as Protocol>::Message>;

/// What an agent learns about the interaction it takes part in.
#[derive(Clone, Copy, Debug)]
pub struct Encounter<'a, M> {
    pub role: Role,
    /// Partner's message as it was before the interaction.
    pub partner: &'a M,
    /// Per-interaction random word shared by both participants. Protocols
    /// with nondeterministic rule choice resolve it with this coin so that
    /// both sides agree on the rule.
    pub coin: u64,
}

/// A population protocol with a randomized input function.
pub trait Protocol: Sync {
    type Input: Clone + Debug + Send + Sync;
    type Hidden: Clone + Debug + PartialEq + Send + Sync;
    type Message: Clone + Debug + PartialEq + Send + Sync;
    type Output: Clone + Debug + PartialEq + Send;

    fn initial_state(&self, input: &Self::Input, rng: &mut AgentRng) -> StateOf<Self>;

    /// Local update of one agent. Must be total on reachable states; an
    /// unexpected pair is reported as [`crate::Error::ProtocolIncomplete`].
    fn transition(
        &self,
        encounter: Encounter<'_, Self::Message>,
        hidden: &Self::Hidden,
        own: &Self::Message,
        rng: &mut AgentRng,
    ) -> Result<StateOf<Self>>;

    fn output(&self, state: &StateOf<Self>) -> Option<Self::Output>;

    /// Stable-output predicate used by [`Convergence::Protocol`]. The default
    /// requires every agent to be decided on the same value.
    fn converged(&self, agents: &[StateOf<Self>]) -> bool {
        let mut outs = agents.iter().map(|a| self.output(a));
        match outs.next() {
            Some(Some(first)) => outs.all(|o| o.as_ref() == Some(&first)),
            _ => false,
        }
    }
}

/// Global state: one agent state per index. The length never changes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Configuration<H, M> {
    agents: Vec<AgentState<H, M>>,
}

impl<H, M> Configuration<H, M> {
    pub fn new(agents: Vec<AgentState<H, M>>) -> Result<Self> {
        if agents.len() < 2 {
            return Err(crate::Error::InvalidPopulation(agents.len()));
        }
        Ok(Self { agents })
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentState<H, M>] {
        &self.agents
    }

    pub fn get(&self, i: usize) -> &AgentState<H, M> {
        &self.agents[i]
    }

    pub(crate) fn set(&mut self, i: usize, state: AgentState<H, M>) {
        self.agents[i] = state;
    }

    pub fn into_agents(self) -> Vec<AgentState<H, M>> {
        self.agents
    }
}

/// One scheduled interaction. Serialized as `{"step", "i", "j"}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InteractionRecord {
    /// 1-based step index.
    pub step: u64,
    #[serde(rename = "i")]
    pub initiator: usize,
    #[serde(rename = "j")]
    pub responder: usize,
}

impl InteractionRecord {
    pub fn involves(&self, agent: usize) -> bool {
        self.initiator == agent || self.responder == agent
    }

    /// The other participant, if `agent` took part.
    pub fn partner_of(&self, agent: usize) -> Option<usize> {
        if self.initiator == agent {
            Some(self.responder)
        } else if self.responder == agent {
            Some(self.initiator)
        } else {
            None
        }
    }
}

/// Writes one `{"step","i","j"}` JSON object per line.
pub fn write_trace_jsonl<W: std::io::Write>(
    records: &[InteractionRecord],
    mut out: W,
) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Steps divided by population size.
pub fn parallel_time(steps: u64, n: usize) -> f64 {
    assert!(n >= 1, "parallel time needs n >= 1");
    steps as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_time_examples() {
        assert_eq!(parallel_time(0, 5), 0.0);
        assert_eq!(parallel_time(100, 10), 10.0);
        let n = 64usize;
        let steps = (n as f64).powi(3) * (n as f64).ln();
        let pt = parallel_time(steps.round() as u64, n);
        let expected = (n as f64).powi(2) * (n as f64).ln();
        assert!((pt - expected).abs() < 1e-2);
    }

    #[test]
    fn configuration_needs_two_agents() {
        let one = vec![AgentState::new((), 0u8)];
        assert_eq!(
            Configuration::new(one).unwrap_err(),
            crate::Error::InvalidPopulation(1)
        );
    }

    #[test]
    fn record_partner() {
        let r = InteractionRecord { step: 1, initiator: 2, responder: 5 };
        assert_eq!(r.partner_of(2), Some(5));
        assert_eq!(r.partner_of(5), Some(2));
        assert_eq!(r.partner_of(3), None);
    }

    #[test]
    fn trace_lines_use_short_keys() {
        let records = [
            InteractionRecord { step: 1, initiator: 0, responder: 3 },
            InteractionRecord { step: 2, initiator: 3, responder: 1 },
        ];
        let mut buf = Vec::new();
        write_trace_jsonl(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"step\":1,\"i\":0,\"j\":3}\n{\"step\":2,\"i\":3,\"j\":1}\n"
        );
        let back: InteractionRecord = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
        assert_eq!(back, records[1]);
    }
}
