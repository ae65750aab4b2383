use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream type handed to protocols.
pub type AgentRng = ChaCha8Rng;

const TAG_SCHEDULER: u64 = 0x5343_4845_4455_4c45;
const TAG_COIN: u64 = 0x434f_494e;
const TAG_INPUT: u64 = 0x494e_5055_54;
const TAG_TRANSITION: u64 = 0x5452_414e_53;
const TAG_TRIAL: u64 = 0x5452_4941_4c;
const TAG_AUX: u64 = 0x4155_58;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive(root: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(root ^ splitmix64(tag)) ^ splitmix64(index.wrapping_add(tag)))
}

/// Named random streams expanded from one root seed.
///
/// The scheduler, the shared interaction coins, each agent's input
/// randomness and each agent's transition randomness are independent
/// streams, so an experiment can hold the schedule fixed while varying the
/// agents' coins (or vice versa).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Streams {
    root: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { root: seed }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Independent streams for Monte Carlo trial `index`.
    pub fn trial(&self, index: u64) -> Streams {
        Streams { root: derive(self.root, TAG_TRIAL, index) }
    }

    pub fn scheduler(&self) -> AgentRng {
        ChaCha8Rng::seed_from_u64(derive(self.root, TAG_SCHEDULER, 0))
    }

    pub fn coins(&self) -> AgentRng {
        ChaCha8Rng::seed_from_u64(derive(self.root, TAG_COIN, 0))
    }

    pub fn input(&self, agent: usize) -> AgentRng {
        ChaCha8Rng::seed_from_u64(derive(self.root, TAG_INPUT, agent as u64))
    }

    pub fn transition(&self, agent: usize) -> AgentRng {
        ChaCha8Rng::seed_from_u64(derive(self.root, TAG_TRANSITION, agent as u64))
    }

    /// Experiment-level randomness (input sampling, label shuffles, ...).
    pub fn aux(&self, label: u64) -> AgentRng {
        ChaCha8Rng::seed_from_u64(derive(self.root, TAG_AUX, label))
    }
}
