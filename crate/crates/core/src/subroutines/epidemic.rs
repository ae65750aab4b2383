use crate::engine::{AgentRng, AgentState, Encounter, Protocol, StateOf};
use crate::{Error, Result};

/// One-way copy of a broadcast slot: an empty slot adopts the partner's
/// value, a filled slot never changes. Two different filled values mean the
/// broadcast source was not unique.
pub fn epidemic_copy(own: Option<u8>, partner: Option<u8>) -> Result<Option<u8>> {
    match (own, partner) {
        (None, p) => Ok(p),
        (Some(a), Some(b)) if a != b => Err(Error::InvariantViolation(format!(
            "conflicting broadcast values {a} and {b}"
        ))),
        (Some(a), _) => Ok(Some(a)),
    }
}

/// Stand-alone broadcast protocol: every agent holds an optional value in
/// its message and copies a partner's value into an empty slot.
#[derive(Clone, Copy, Debug, Default)]
pub struct Epidemic;

impl Protocol for Epidemic {
    type Input = Option<u8>;
    type Hidden = ();
    type Message = Option<u8>;
    type Output = u8;

    fn initial_state(&self, input: &Option<u8>, _rng: &mut AgentRng) -> StateOf<Self> {
        AgentState::new((), *input)
    }

    fn transition(
        &self,
        encounter: Encounter<'_, Option<u8>>,
        _hidden: &(),
        own: &Option<u8>,
        _rng: &mut AgentRng,
    ) -> Result<StateOf<Self>> {
        Ok(AgentState::new((), epidemic_copy(*own, *encounter.partner)?))
    }

    fn output(&self, state: &StateOf<Self>) -> Option<u8> {
        state.message
    }
}
