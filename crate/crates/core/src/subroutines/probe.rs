//! Epidemic-driven probe and its coupling with the phase clock.
//!
//! ```text
//! P1  x, y -> x, max(x, y)    responder does not satisfy the predicate
//! P2  0, y -> 0, y            responder satisfies it
//! P3  x, y -> x, 2   [x > 0]  responder satisfies it
//! ```
//!
//! At every round start the leader injects a 1-signal. A satisfying agent
//! reached by it turns 2, and the 2 flows back to the leader. At the end of
//! a round the leader reads 1 as "nobody satisfies" and 2 as "somebody does".

use rand::seq::IteratorRandom;
use serde::{Deserialize, Serialize};

use super::clock::{phase_clock_update, ClockParams, PhaseClockState};
use crate::engine::{
    select_pair, AgentRng, AgentState, Encounter, Execution, Protocol, Role, StateOf, Streams,
};
use crate::{Error, Result};

/// Probe rules; only the responder changes.
pub fn probe_update(x: u8, y: u8, responder_satisfies: bool) -> (u8, u8) {
    debug_assert!(x <= 2 && y <= 2);
    if !responder_satisfies {
        (x, x.max(y))
    } else if x == 0 {
        (x, y)
    } else {
        (x, 2)
    }
}

/// Leader's reading of the probe at a round boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoundOutcome {
    NoneSatisfies,
    SomeSatisfies,
    Inconclusive,
}

impl RoundOutcome {
    /// Whether this reading agrees with the true presence of a satisfying
    /// agent.
    pub fn matches(self, some_satisfies: bool) -> bool {
        match self {
            RoundOutcome::NoneSatisfies => !some_satisfies,
            RoundOutcome::SomeSatisfies => some_satisfies,
            RoundOutcome::Inconclusive => false,
        }
    }
}

pub fn probe_round_outcome(leader_z: u8) -> RoundOutcome {
    match leader_z {
        0 => RoundOutcome::Inconclusive,
        1 => RoundOutcome::NoneSatisfies,
        _ => RoundOutcome::SomeSatisfies,
    }
}

/// Probe-and-clock substate carried in every agent's message.
///
/// `z` is only meaningful for the round it was written in; an agent that
/// moves to a newer round reads its own stale `z` as 0, and a partner's `z`
/// from an older round also reads as 0. `fired` latches at the leader the
/// first time a round ends with nobody satisfying the predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProbeClock {
    pub clock: PhaseClockState,
    pub z: u8,
    pub fired: bool,
}

impl ProbeClock {
    pub fn initial(is_leader: bool) -> Self {
        Self { clock: PhaseClockState::default(), z: u8::from(is_leader), fired: false }
    }

    /// One interaction of the clock and probe. `satisfies` is the
    /// predicate evaluated on this agent's own visible state. Returns the
    /// round outcome when this interaction closed a round at the leader.
    pub fn interact(
        &self,
        partner: &ProbeClock,
        role: Role,
        is_leader: bool,
        satisfies: bool,
        params: ClockParams,
    ) -> (ProbeClock, Option<RoundOutcome>) {
        let (clock, boundary) = phase_clock_update(self.clock, partner.clock, is_leader, params);
        let mut next = ProbeClock { clock, z: self.z, fired: self.fired };
        if clock.round != self.clock.round {
            next.z = 0;
        }
        let mut outcome = None;
        if boundary {
            let reading = probe_round_outcome(self.z);
            if reading == RoundOutcome::NoneSatisfies {
                next.fired = true;
            }
            next.z = 1;
            outcome = Some(reading);
        }
        if role == Role::Responder {
            let x = if partner.clock.round == next.clock.round { partner.z } else { 0 };
            next.z = probe_update(x, next.z, satisfies).1;
        }
        (next, outcome)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeBenchInput {
    pub leader: bool,
    pub marked: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProbeBenchMessage {
    pub leader: bool,
    /// The probed predicate.
    pub marked: bool,
    pub probe: ProbeClock,
}

/// Probe over a static predicate, driven by the phase clock. The leader's
/// hidden part keeps the outcome of the last completed round.
#[derive(Clone, Copy, Debug, Default)]
pub struct ProbeBench {
    pub clock: ClockParams,
}

impl Protocol for ProbeBench {
    type Input = ProbeBenchInput;
    type Hidden = Option<RoundOutcome>;
    type Message = ProbeBenchMessage;
    type Output = RoundOutcome;

    fn initial_state(&self, input: &ProbeBenchInput, _rng: &mut AgentRng) -> StateOf<Self> {
        AgentState::new(
            None,
            ProbeBenchMessage {
                leader: input.leader,
                marked: input.marked,
                probe: ProbeClock::initial(input.leader),
            },
        )
    }

    fn transition(
        &self,
        encounter: Encounter<'_, ProbeBenchMessage>,
        hidden: &Option<RoundOutcome>,
        own: &ProbeBenchMessage,
        _rng: &mut AgentRng,
    ) -> Result<StateOf<Self>> {
        let (probe, outcome) = own.probe.interact(
            &encounter.partner.probe,
            encounter.role,
            own.leader,
            own.marked,
            self.clock,
        );
        Ok(AgentState::new(outcome.or(*hidden), ProbeBenchMessage { probe, ..*own }))
    }

    fn output(&self, state: &StateOf<Self>) -> Option<RoundOutcome> {
        state.hidden
    }

    fn converged(&self, _agents: &[StateOf<Self>]) -> bool {
        false
    }
}

/// One completed clock round at the leader.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClockRound {
    pub outcome: RoundOutcome,
    /// Whether some agent satisfied the predicate.
    pub truth: bool,
    /// Steps since the previous round boundary.
    pub length: u64,
}

/// Runs the clock-driven probe with agent 0 as leader and, if `marked`, a
/// single satisfying agent (index 1), and records `rounds` round outcomes.
pub fn measure_clock_rounds(
    n: usize,
    params: ClockParams,
    marked: bool,
    rounds: usize,
    streams: &Streams,
) -> Result<Vec<ClockRound>> {
    if n < 2 {
        return Err(Error::InvalidPopulation(n));
    }
    let bench = ProbeBench { clock: params };
    let inputs = (0..n)
        .map(|j| ProbeBenchInput { leader: j == 0, marked: marked && j == 1 })
        .collect();
    let mut exec = Execution::new(&bench, inputs, streams)?;
    let budget = (1_000.0 * n as f64 * (n as f64).ln().max(1.0)) as u64 * rounds as u64;
    let mut out = Vec::with_capacity(rounds);
    let mut last_round = 0u32;
    let mut last_boundary = 0u64;
    while out.len() < rounds && exec.steps() < budget {
        exec.step()?;
        let leader = &exec.agents()[0];
        if leader.message.probe.clock.round != last_round {
            last_round = leader.message.probe.clock.round;
            let outcome = leader.hidden.unwrap_or(RoundOutcome::Inconclusive);
            out.push(ClockRound { outcome, truth: marked, length: exec.steps() - last_boundary });
            last_boundary = exec.steps();
        }
    }
    if out.len() < rounds {
        return Err(Error::InvariantViolation(format!(
            "phase clock completed only {} of {rounds} rounds",
            out.len()
        )));
    }
    Ok(out)
}

/// Probe without a clock: rounds of `ceil(d n ln n)` steps with
/// a global reset between rounds. Even rounds contain one satisfying agent,
/// odd rounds none. Returns the fraction of rounds read correctly.
pub fn fixed_length_probe_accuracy(
    n: usize,
    d: f64,
    rounds: usize,
    streams: &Streams,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidPopulation(n));
    }
    if rounds == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let len = (d * n as f64 * (n as f64).ln()).ceil().max(0.0) as u64;
    let mut sched = streams.scheduler();
    let mut aux = streams.aux(0x9e0be);
    let mut z = vec![0u8; n];
    let mut marked = vec![false; n];
    let mut correct = 0usize;
    for round in 0..rounds {
        let truth = round % 2 == 0;
        z.iter_mut().for_each(|v| *v = 0);
        marked.iter_mut().for_each(|v| *v = false);
        z[0] = 1;
        if truth {
            let who = (1..n).choose(&mut aux).expect("n >= 2");
            marked[who] = true;
        }
        for _ in 0..len {
            let (i, j) = select_pair(n, &mut sched)?;
            z[j] = probe_update(z[i], z[j], marked[j]).1;
        }
        if probe_round_outcome(z[0]).matches(truth) {
            correct += 1;
        }
    }
    Ok(correct as f64 / rounds as f64)
}
