//! Leader-driven phase clock.
//!
//! Every agent carries a phase in `[0, m)` and a round counter. Non-leaders
//! adopt any partner reading that is ahead of their own; the leader moves
//! to the next phase when it meets an agent already at its own reading, and
//! a wrap from phase `m-1` to `0` starts a new round. The round counter only
//! grows, which removes the ambiguity of comparing phases on a circle when an
//! agent lags far behind.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClockParams {
    /// Number of phases per round.
    pub m: u8,
}

impl Default for ClockParams {
    fn default() -> Self {
        Self { m: 8 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhaseClockState {
    // Field order matters: the derived ordering is (round, phase).
    pub round: u32,
    pub phase: u8,
}

impl PhaseClockState {
    pub fn new(round: u32, phase: u8) -> Self {
        Self { round, phase }
    }
}

/// Clock update for one agent. Returns the new reading and whether this
/// interaction ended a round (only ever true for the leader).
pub fn phase_clock_update(
    own: PhaseClockState,
    partner: PhaseClockState,
    is_leader: bool,
    params: ClockParams,
) -> (PhaseClockState, bool) {
    if !is_leader {
        return (own.max(partner), false);
    }
    if partner != own {
        return (own, false);
    }
    if own.phase + 1 >= params.m {
        (PhaseClockState::new(own.round + 1, 0), true)
    } else {
        (PhaseClockState::new(own.round, own.phase + 1), false)
    }
}
