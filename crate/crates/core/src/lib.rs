//! Discrete-step simulator for population protocols under a uniform random
//! scheduler, together with private Remainder protocols and a statistical
//! laboratory for measuring what a semi-honest agent learns from its view.
//!
//! The crate is organized in four layers:
//!
//! * [`engine`]: generic executor (scheduling, transition dispatch, traces,
//!   views, convergence detection, seeded random streams).
//! * [`subroutines`]: secure peer-to-peer transfer, the probe, the phase
//!   clock and epidemic broadcast.
//! * [`protocols`]: the unit-transfer Remainder protocol, the
//!   information-theoretically private Remainder protocol, the sequential
//!   ring oracle and a brute-force ground truth.
//! * [`privacy_lab`]: adversary views, distinguishers and attack reports.
//!
//! [`audit`] replays executions step by step against the protocol invariants.

pub mod audit;
pub mod engine;
pub mod error;
pub mod modulus;
pub mod privacy_lab;
pub mod protocols;
pub mod subroutines;

pub use error::{Error, Result};
pub use modulus::Modulus;

/// Version string stamped into every experiment artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
