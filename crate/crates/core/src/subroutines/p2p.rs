//! Secure peer-to-peer transfer of a hidden value between a unique Sender
//! and one Receiver chosen among the eligible (`u`-labeled) agents.
//!
//! ```text
//! S1  <mu,(r,S)>,  <*,(*,ū)>  ->  <mu,(r',S)>,      <*,(*,ū)>
//! S2  <mu,(r,S)>,  <*,(*,u)>  ->  <⊥,(mu-r,S')>,    <r,(*,R)>
//! S3  <⊥,(x,S')>,  <y,(*,R)>  ->  <⊥,(⊥,ū)>,        <x+y,(*,S)>
//! ```
//!
//! The Sender's mask is also redrawn on every other interaction it takes
//! part in, and a freshly promoted Sender draws a new mask, so a mask is
//! only ever shown to the agent that consumes it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{AgentRng, AgentState, Encounter, Protocol, Role, StateOf};
use crate::{Error, Modulus, Result};

/// Token label of the transfer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    /// `S`: holds the value and looks for a receiver.
    Sender,
    /// `S'`: has chosen a receiver and shows the masked value.
    SenderPrime,
    /// `R`: chosen receiver waiting for the masked value.
    Receiver,
    /// `u`: eligible to become the receiver.
    Unvisited,
    /// `ū`: not eligible.
    Visited,
}

impl Label {
    pub fn is_token(self) -> bool {
        matches!(self, Label::Sender | Label::SenderPrime)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Sender => "S",
            Label::SenderPrime => "S'",
            Label::Receiver => "R",
            Label::Unvisited => "u",
            Label::Visited => "ubar",
        })
    }
}

/// Which transfer rule a scheduled pair triggers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum P2PRule {
    /// S1: Sender meets a non-eligible agent and redraws its mask.
    Refresh,
    /// S2: Sender meets an eligible agent and hands over its mask.
    Send,
    /// S3: Sender' delivers the masked value to the Receiver.
    Deliver,
}

/// Classifies an ordered pair of labels. Two tokens meeting, or a Sender
/// meeting a Receiver (which implies a second token elsewhere), violate the
/// unique-token invariant.
pub fn transfer_rule(initiator: Label, responder: Label) -> Result<Option<P2PRule>> {
    use Label::*;
    if initiator.is_token() && responder.is_token() {
        return Err(Error::InvariantViolation(format!(
            "two token holders met ({initiator}, {responder})"
        )));
    }
    if matches!((initiator, responder), (Sender, Receiver) | (Receiver, Sender)) {
        return Err(Error::InvariantViolation(
            "Sender coexists with a Receiver".to_string(),
        ));
    }
    Ok(match (initiator, responder) {
        (Sender, Visited) => Some(P2PRule::Refresh),
        (Sender, Unvisited) => Some(P2PRule::Send),
        (SenderPrime, Receiver) => Some(P2PRule::Deliver),
        _ => None,
    })
}

/// Visible part of a transfer agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct P2PMessage {
    pub r: Option<u8>,
    pub label: Label,
}

/// `<mu, (r, L)>`; the hidden part is the secret `mu`.
pub type P2PState = AgentState<Option<u8>, P2PMessage>;

/// Local transfer update of one agent.
pub fn p2p_delta(
    k: Modulus,
    encounter: Encounter<'_, P2PMessage>,
    mu: Option<u8>,
    own: &P2PMessage,
    rng: &mut AgentRng,
) -> Result<P2PState> {
    let (init, resp) = match encounter.role {
        Role::Initiator => (own, encounter.partner),
        Role::Responder => (encounter.partner, own),
    };
    let rule = transfer_rule(init.label, resp.label)?;
    let mut next = P2PState::new(mu, *own);
    match (rule, encounter.role) {
        (Some(P2PRule::Send), Role::Initiator) => {
            let (secret, mask) = match (mu, own.r) {
                (Some(s), Some(m)) => (s, m),
                _ => return Err(incomplete("Sender without secret or mask")),
            };
            next.hidden = None;
            next.message = P2PMessage { r: Some(k.sub(secret, mask)), label: Label::SenderPrime };
        }
        (Some(P2PRule::Send), Role::Responder) => {
            let mask = init.r.ok_or_else(|| incomplete("Sender shows no mask"))?;
            next.hidden = Some(mask);
            next.message.label = Label::Receiver;
        }
        (Some(P2PRule::Deliver), Role::Initiator) => {
            next.hidden = None;
            next.message = P2PMessage { r: None, label: Label::Visited };
        }
        (Some(P2PRule::Deliver), Role::Responder) => {
            let x = init.r.ok_or_else(|| incomplete("Sender' shows no masked value"))?;
            let y = mu.ok_or_else(|| incomplete("Receiver holds no mask"))?;
            next.hidden = Some(k.add(x, y));
            next.message = P2PMessage { r: Some(k.sample(rng)), label: Label::Sender };
        }
        _ if own.label == Label::Sender => {
            // S1, and the same redraw whenever the Sender does not send.
            next.message.r = Some(k.sample(rng));
        }
        _ => {}
    }
    Ok(next)
}

fn incomplete(what: &str) -> Error {
    Error::ProtocolIncomplete(what.to_string())
}

/// Initial role of an agent in a stand-alone transfer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum P2PInput {
    Sender(u8),
    Unvisited,
    Visited,
}

/// Stand-alone transfer protocol. Every agent starts with a uniform visible
/// mask. The transfer has no natural end (the new Sender keeps looking for
/// eligible agents), so callers detect delivery themselves.
#[derive(Clone, Copy, Debug)]
pub struct P2PTransfer {
    pub k: Modulus,
}

impl P2PTransfer {
    pub fn new(k: Modulus) -> Self {
        Self { k }
    }
}

impl Protocol for P2PTransfer {
    type Input = P2PInput;
    type Hidden = Option<u8>;
    type Message = P2PMessage;
    type Output = u8;

    fn initial_state(&self, input: &P2PInput, rng: &mut AgentRng) -> StateOf<Self> {
        let r = Some(self.k.sample(rng));
        match *input {
            P2PInput::Sender(mu) => {
                P2PState::new(Some(mu % self.k.get()), P2PMessage { r, label: Label::Sender })
            }
            P2PInput::Unvisited => P2PState::new(None, P2PMessage { r, label: Label::Unvisited }),
            P2PInput::Visited => P2PState::new(None, P2PMessage { r, label: Label::Visited }),
        }
    }

    fn transition(
        &self,
        encounter: Encounter<'_, P2PMessage>,
        hidden: &Option<u8>,
        own: &P2PMessage,
        rng: &mut AgentRng,
    ) -> Result<StateOf<Self>> {
        p2p_delta(self.k, encounter, *hidden, own, rng)
    }

    /// The value held by the current Sender.
    fn output(&self, state: &StateOf<Self>) -> Option<u8> {
        (state.message.label == Label::Sender).then_some(state.hidden).flatten()
    }

    fn converged(&self, _agents: &[StateOf<Self>]) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Streams;

    fn k(v: u32) -> Modulus {
        Modulus::new(v).unwrap()
    }

    fn enc(role: Role, partner: &P2PMessage) -> Encounter<'_, P2PMessage> {
        Encounter { role, partner, coin: 0 }
    }

    #[test]
    fn send_then_deliver_recovers_secret() {
        let k = k(4);
        let mut rng = Streams::new(1).transition(0);
        let sender = P2PState::new(Some(3), P2PMessage { r: Some(2), label: Label::Sender });
        let eligible = P2PState::new(None, P2PMessage { r: Some(0), label: Label::Unvisited });

        let s = p2p_delta(k, enc(Role::Initiator, &eligible.message), sender.hidden, &sender.message, &mut rng).unwrap();
        let rcv = p2p_delta(k, enc(Role::Responder, &sender.message), eligible.hidden, &eligible.message, &mut rng).unwrap();
        assert_eq!(s.hidden, None);
        assert_eq!(s.message, P2PMessage { r: Some(1), label: Label::SenderPrime });
        assert_eq!(rcv.hidden, Some(2));
        assert_eq!(rcv.message.label, Label::Receiver);

        let s2 = p2p_delta(k, enc(Role::Initiator, &rcv.message), s.hidden, &s.message, &mut rng).unwrap();
        let rcv2 = p2p_delta(k, enc(Role::Responder, &s.message), rcv.hidden, &rcv.message, &mut rng).unwrap();
        assert_eq!(s2, P2PState::new(None, P2PMessage { r: None, label: Label::Visited }));
        assert_eq!(rcv2.hidden, Some(3));
        assert_eq!(rcv2.message.label, Label::Sender);
    }

    #[test]
    fn zero_secret_zero_mask() {
        let k = k(2);
        let mut rng = Streams::new(2).transition(0);
        let sender = P2PState::new(Some(0), P2PMessage { r: Some(0), label: Label::Sender });
        let eligible = P2PState::new(None, P2PMessage { r: Some(1), label: Label::Unvisited });
        let s = p2p_delta(k, enc(Role::Initiator, &eligible.message), sender.hidden, &sender.message, &mut rng).unwrap();
        assert_eq!(s.message.r, Some(0));
        let rcv = p2p_delta(k, enc(Role::Responder, &sender.message), eligible.hidden, &eligible.message, &mut rng).unwrap();
        let rcv2 = p2p_delta(k, enc(Role::Responder, &s.message), rcv.hidden, &rcv.message, &mut rng).unwrap();
        assert_eq!(rcv2.hidden, Some(0));
    }

    #[test]
    fn refresh_only_touches_sender_mask() {
        let k = k(8);
        let mut rng = Streams::new(3).transition(0);
        let sender = P2PState::new(Some(5), P2PMessage { r: Some(6), label: Label::Sender });
        let visited = P2PState::new(None, P2PMessage { r: Some(1), label: Label::Visited });
        let other = p2p_delta(k, enc(Role::Responder, &sender.message), visited.hidden, &visited.message, &mut rng).unwrap();
        assert_eq!(other, visited);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let s = p2p_delta(k, enc(Role::Initiator, &visited.message), sender.hidden, &sender.message, &mut rng).unwrap();
            assert_eq!(s.hidden, Some(5));
            assert_eq!(s.message.label, Label::Sender);
            seen.insert(s.message.r.unwrap());
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn two_tokens_are_rejected() {
        assert!(matches!(
            transfer_rule(Label::Sender, Label::SenderPrime),
            Err(Error::InvariantViolation(_))
        ));
        assert!(matches!(
            transfer_rule(Label::Receiver, Label::Sender),
            Err(Error::InvariantViolation(_))
        ));
        assert_eq!(transfer_rule(Label::Visited, Label::Unvisited), Ok(None));
        assert_eq!(transfer_rule(Label::Receiver, Label::SenderPrime), Ok(None));
    }
}
