use serde::{Deserialize, Serialize};

use super::{AgentRng, AgentState, Encounter, Protocol, Role, StateOf};
use crate::Result;

/// One interaction as seen by a participant: its role, the partner's
/// visible message, and the shared interaction coin.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation<M> {
    pub role: Role,
    pub partner: M,
    pub coin: u64,
}

/// Everything one agent knows: its input, its state after the input
/// function, and the ordered list of its observations. Nothing about any
/// other agent's hidden part is reachable from here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct View<I, H, M> {
    pub input: I,
    pub initial_state: AgentState<H, M>,
    pub observations: Vec<Observation<M>>,
}

/// View type of protocol `P`.
pub type ViewOf<P> =
    View<<P as Protocol>::Input, <P as Protocol>::Hidden, <P as Protocol>::Message>;

impl<I, H, M> View<I, H, M> {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Partner messages in observation order.
    pub fn partner_messages(&self) -> impl Iterator<Item = &M> {
        self.observations.iter().map(|o| &o.partner)
    }
}

/// Which agents' views an execution records.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Capture {
    #[default]
    None,
    All,
    Agents(Vec<usize>),
}

impl Capture {
    pub fn includes(&self, agent: usize) -> bool {
        match self {
            Capture::None => false,
            Capture::All => true,
            Capture::Agents(list) => list.contains(&agent),
        }
    }
}

/// Replays a view through the transition function, returning the agent's
/// state before the first observation and after each one. `rng` must be the
/// agent's own transition stream, freshly seeded.
pub fn replay_view<P: Protocol>(
    protocol: &P,
    view: &View<P::Input, P::Hidden, P::Message>,
    rng: &mut AgentRng,
) -> Result<Vec<StateOf<P>>> {
    let mut states = Vec::with_capacity(view.observations.len() + 1);
    let mut current = view.initial_state.clone();
    states.push(current.clone());
    for obs in &view.observations {
        let encounter = Encounter { role: obs.role, partner: &obs.partner, coin: obs.coin };
        current = protocol.transition(encounter, &current.hidden, &current.message, rng)?;
        states.push(current.clone());
    }
    Ok(states)
}
