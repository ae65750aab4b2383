//! Building blocks shared by the private protocols: secure peer-to-peer
//! transfer, the epidemic probe, a leader-driven phase clock, and one-way
//! epidemic broadcast.

pub mod clock;
pub mod epidemic;
pub mod p2p;
pub mod probe;

pub use clock::{phase_clock_update, ClockParams, PhaseClockState};
pub use epidemic::{epidemic_copy, Epidemic};
pub use p2p::{p2p_delta, transfer_rule, Label, P2PInput, P2PMessage, P2PRule, P2PState, P2PTransfer};
pub use probe::{
    fixed_length_probe_accuracy, measure_clock_rounds, probe_round_outcome, probe_update,
    ClockRound, ProbeBench, ProbeBenchInput, ProbeBenchMessage, ProbeClock, RoundOutcome,
};
