//! What an adversary can read off a partner's visible message.

use crate::engine::{Protocol, StateOf};
use crate::protocols::{Alg1, Alg1State, Alg3, Alg3Message, RemainderParams, Value};
use crate::Result;

/// A Remainder protocol the privacy experiments can attack.
pub trait Observable: Protocol {
    /// Identifier used in reports.
    const NAME: &'static str;

    fn params(&self) -> RemainderParams;

    /// One input per agent; `leader` is ignored by leaderless protocols.
    fn make_inputs(&self, values: &[u8], leader: usize) -> Result<Vec<Self::Input>>;

    /// The visible value of a message as a small integer.
    fn symbol(&self, msg: &Self::Message) -> u32;

    /// Guess of the sender's input from a single message.
    fn guess(&self, msg: &Self::Message) -> u8;

    /// Whether only runs with a correct answer may be analyzed. Such runs
    /// have to be completed before their views can be used.
    fn requires_success(&self) -> bool;

    fn succeeded(&self, agents: &[StateOf<Self>], values: &[u8]) -> bool;

    fn default_budget(&self, n: usize) -> u64;
}

/// Step budget `c n^3 ln n`, at least `n^2`.
pub fn cubic_budget(n: usize, c: f64) -> u64 {
    let nf = n as f64;
    (c * nf * nf * nf * nf.ln()).max(nf * nf) as u64
}

impl Observable for Alg1 {
    const NAME: &'static str = "alg1";

    fn params(&self) -> RemainderParams {
        self.params
    }

    fn make_inputs(&self, values: &[u8], _leader: usize) -> Result<Vec<u8>> {
        self.params.check_inputs(values)?;
        Ok(values.to_vec())
    }

    /// `2v + f` with `⊥0 = k`, `⊥1 = k+1`.
    fn symbol(&self, msg: &Alg1State) -> u32 {
        let k = u32::from(self.params.k.get());
        let v = match msg.v {
            Value::Num(x) => u32::from(x),
            Value::Decided(b) => k + u32::from(b),
        };
        2 * v + u32::from(msg.flag)
    }

    fn guess(&self, msg: &Alg1State) -> u8 {
        match msg.v {
            Value::Num(x) => x,
            Value::Decided(_) => 0,
        }
    }

    fn requires_success(&self) -> bool {
        false
    }

    fn succeeded(&self, agents: &[StateOf<Self>], values: &[u8]) -> bool {
        let truth = self.params.k.sum(values.iter().copied()) == self.params.r;
        self.converged(agents) && self.population_output(agents) == Some(truth)
    }

    fn default_budget(&self, n: usize) -> u64 {
        cubic_budget(n, 20.0)
    }
}

impl Observable for Alg3 {
    const NAME: &'static str = "alg3";

    fn params(&self) -> RemainderParams {
        self.params
    }

    fn make_inputs(&self, values: &[u8], leader: usize) -> Result<Vec<Self::Input>> {
        self.params.check_inputs(values)?;
        Alg3::inputs(values, leader)
    }

    /// The visible mask, with `⊥ = k`.
    fn symbol(&self, msg: &Alg3Message) -> u32 {
        u32::from(msg.r.unwrap_or(self.params.k.get()))
    }

    fn guess(&self, msg: &Alg3Message) -> u8 {
        msg.r.unwrap_or(0)
    }

    fn requires_success(&self) -> bool {
        true
    }

    fn succeeded(&self, agents: &[StateOf<Self>], values: &[u8]) -> bool {
        Alg3::population_sum(agents) == Some(self.params.k.sum(values.iter().copied()))
    }

    fn default_budget(&self, n: usize) -> u64 {
        cubic_budget(n, 20.0)
    }
}
