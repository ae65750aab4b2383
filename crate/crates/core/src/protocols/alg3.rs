//! Information-theoretically private Remainder.
//!
//! A single token walks the population and accumulates the inputs through
//! masked peer-to-peer transfers. The leader starts as the Sender holding
//! its input blinded by a private mask `r0`. Once the probe reports that no
//! agent is left with label `u`, the leader makes itself eligible again,
//! receives the blinded total, removes `r0` and broadcasts the result.
//!
//! ```text
//! R1  <*,(r,S,*,*)>,  <*,(*,ū,*,*)>   -> <*,(r',S,*,*)>,      <*,(*,ū,*,*)>
//! R2  <u,(r,S,*,*)>,  <v,(*,u,*,*)>   -> <⊥,(u-r,S',*,*)>,    <v+r,(*,R,*,*)>
//! R3  <⊥,(x,S',*,*)>, <y,(*,R,*,*)>   -> <⊥,(⊥,ū,*,*)>,       <x+y,(r',S,*,*)>
//! R4  <⊥,(⊥,ū,1,fired)>, <*>          -> <0,(⊥,u,1,fired)>,   <*>
//! ```
//!
//! Every interaction also advances the phase clock and the probe for the
//! predicate "own label is `u`", and copies the answer slot by epidemic.

use serde::{Deserialize, Serialize};

use super::RemainderParams;
use crate::engine::{AgentRng, AgentState, Encounter, Protocol, Role, StateOf};
use crate::subroutines::p2p::transfer_rule;
use crate::subroutines::{epidemic_copy, ClockParams, Label, P2PRule, ProbeClock};
use crate::{Error, Modulus, Result};

/// Private part of an agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alg3Hidden {
    /// Secret share of the running sum.
    pub mu: Option<u8>,
    /// Leader's blinding mask; `None` at every other agent.
    pub r0: Option<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alg3Message {
    pub r: Option<u8>,
    pub label: Label,
    pub leader: bool,
    pub probe: ProbeClock,
    /// Broadcast answer `sum mod k`, once known.
    pub out: Option<u8>,
}

pub type Alg3State = AgentState<Alg3Hidden, Alg3Message>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alg3Input {
    pub value: u8,
    pub leader: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alg3Rule {
    R1,
    R2,
    R3,
    R4,
}

/// Input state with explicit masks. `r0` is ignored for non-leaders.
pub fn alg3_state(k: Modulus, input: Alg3Input, mask: u8, r0: u8) -> Alg3State {
    let value = input.value % k.get();
    let (mu, r0, label) = if input.leader {
        (k.add(value, r0), Some(r0 % k.get()), Label::Sender)
    } else {
        (value, None, Label::Unvisited)
    };
    AgentState::new(
        Alg3Hidden { mu: Some(mu), r0 },
        Alg3Message {
            r: Some(mask % k.get()),
            label,
            leader: input.leader,
            probe: ProbeClock::initial(input.leader),
            out: None,
        },
    )
}

/// Randomized input function: the visible mask and, at the leader, `r0`
/// are uniform on `Z_k`.
pub fn alg3_input(k: Modulus, input: Alg3Input, rng: &mut AgentRng) -> Alg3State {
    let mask = k.sample(rng);
    let r0 = if input.leader { k.sample(rng) } else { 0 };
    alg3_state(k, input, mask, r0)
}

/// Sum of all held secrets plus the masked value in transit. Constant over
/// any execution.
pub fn conserved_ledger(agents: &[Alg3State], k: Modulus) -> u8 {
    k.sum(agents.iter().flat_map(|a| {
        let transit = (a.message.label == Label::SenderPrime).then_some(a.message.r).flatten();
        a.hidden.mu.into_iter().chain(transit)
    }))
}

/// Classifies an ordered pair of messages.
pub fn alg3_rule(init: &Alg3Message, resp: &Alg3Message) -> Result<Option<Alg3Rule>> {
    Ok(match transfer_rule(init.label, resp.label)? {
        Some(P2PRule::Refresh) => Some(Alg3Rule::R1),
        Some(P2PRule::Send) => Some(Alg3Rule::R2),
        Some(P2PRule::Deliver) => Some(Alg3Rule::R3),
        None if reopens(init) => Some(Alg3Rule::R4),
        None => None,
    })
}

// The leader reopens itself at most once: after it has learned the answer it
// never does again, even if it later walks through ū as a Sender.
fn reopens(m: &Alg3Message) -> bool {
    m.leader && m.label == Label::Visited && m.r.is_none() && m.probe.fired && m.out.is_none()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Alg3 {
    pub params: RemainderParams,
    pub clock: ClockParams,
}

impl Alg3 {
    pub fn new(params: RemainderParams, clock: ClockParams) -> Self {
        Self { params, clock }
    }

    /// One input per agent with `leader` as the designated leader.
    pub fn inputs(values: &[u8], leader: usize) -> Result<Vec<Alg3Input>> {
        if leader >= values.len() {
            return Err(Error::InvalidInput(format!(
                "leader {leader} out of range for {} agents",
                values.len()
            )));
        }
        Ok(values
            .iter()
            .enumerate()
            .map(|(j, &value)| Alg3Input { value, leader: j == leader })
            .collect())
    }

    /// The broadcast sum, if every agent agrees on one.
    pub fn population_sum(agents: &[Alg3State]) -> Option<u8> {
        let first = agents.first()?.message.out?;
        agents.iter().all(|a| a.message.out == Some(first)).then_some(first)
    }

    fn main_rule(
        &self,
        role: Role,
        init: &Alg3Message,
        resp: &Alg3Message,
        hidden: &Alg3Hidden,
        own: &Alg3Message,
        rng: &mut AgentRng,
    ) -> Result<(Alg3State, Option<u8>)> {
        let k = self.params.k;
        let mut h = *hidden;
        let mut m = *own;
        let mut answer = None;
        match (alg3_rule(init, resp)?, role) {
            (Some(Alg3Rule::R2), Role::Initiator) => {
                let u = h.mu.ok_or_else(|| incomplete("Sender without a secret"))?;
                let mask = own.r.ok_or_else(|| incomplete("Sender without a mask"))?;
                h.mu = None;
                m.r = Some(k.sub(u, mask));
                m.label = Label::SenderPrime;
            }
            (Some(Alg3Rule::R2), Role::Responder) => {
                let mask = init.r.ok_or_else(|| incomplete("Sender shows no mask"))?;
                let v = h.mu.ok_or_else(|| incomplete("eligible agent without a secret"))?;
                h.mu = Some(k.add(v, mask));
                m.label = Label::Receiver;
            }
            (Some(Alg3Rule::R3), Role::Initiator) => {
                h.mu = None;
                m.r = None;
                m.label = Label::Visited;
            }
            (Some(Alg3Rule::R3), Role::Responder) => {
                let x = init.r.ok_or_else(|| incomplete("Sender' shows no masked value"))?;
                let y = h.mu.ok_or_else(|| incomplete("Receiver without a secret"))?;
                let total = k.add(x, y);
                h.mu = Some(total);
                m.r = Some(k.sample(rng));
                m.label = Label::Sender;
                if own.leader && own.out.is_none() {
                    let r0 = h.r0.ok_or_else(|| incomplete("leader without r0"))?;
                    answer = Some(k.sub(total, r0));
                }
            }
            (Some(Alg3Rule::R4), Role::Initiator) => {
                h.mu = Some(0);
                m.label = Label::Unvisited;
            }
            _ if own.label == Label::Sender => {
                // R1, and the same redraw whenever the Sender does not send.
                m.r = Some(k.sample(rng));
            }
            _ => {}
        }
        Ok((AgentState::new(h, m), answer))
    }
}

fn incomplete(what: &str) -> Error {
    Error::ProtocolIncomplete(what.to_string())
}

impl Protocol for Alg3 {
    type Input = Alg3Input;
    type Hidden = Alg3Hidden;
    type Message = Alg3Message;
    type Output = bool;

    fn initial_state(&self, input: &Alg3Input, rng: &mut AgentRng) -> StateOf<Self> {
        alg3_input(self.params.k, *input, rng)
    }

    fn transition(
        &self,
        encounter: Encounter<'_, Alg3Message>,
        hidden: &Alg3Hidden,
        own: &Alg3Message,
        rng: &mut AgentRng,
    ) -> Result<StateOf<Self>> {
        let partner = encounter.partner;
        let (init, resp) = match encounter.role {
            Role::Initiator => (own, partner),
            Role::Responder => (partner, own),
        };
        let (mut next, answer) = self.main_rule(encounter.role, init, resp, hidden, own, rng)?;
        let satisfies = own.label == Label::Unvisited;
        next.message.probe =
            own.probe.interact(&partner.probe, encounter.role, own.leader, satisfies, self.clock).0;
        next.message.out = epidemic_copy(answer.or(own.out), partner.out)?;
        Ok(next)
    }

    fn output(&self, state: &StateOf<Self>) -> Option<bool> {
        state.message.out.map(|s| s == self.params.r)
    }

    fn converged(&self, agents: &[StateOf<Self>]) -> bool {
        agents.iter().all(|a| a.message.out.is_some())
    }
}
