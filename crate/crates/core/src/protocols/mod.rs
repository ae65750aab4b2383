//! Remainder protocols: the unit-transfer protocol with full-state
//! visibility, the information-theoretically private token protocol, the
//! sequential ring oracle, and a brute-force ground truth.

pub mod alg1;
pub mod alg3;
pub mod ring;

use serde::{Deserialize, Serialize};

use crate::{Error, Modulus, Result};

pub use alg1::{Alg1, Alg1Rule, Alg1State, Value};
pub use alg3::{
    alg3_input, alg3_rule, alg3_state, conserved_ledger, Alg3, Alg3Hidden, Alg3Input, Alg3Message,
    Alg3Rule, Alg3State,
};
pub use ring::{ring_remainder_oracle, RingRun, RingView};

/// Remainder predicate parameters: true iff the input sum is `r` mod `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RemainderParams {
    pub k: Modulus,
    pub r: u8,
}

impl RemainderParams {
    pub fn new(k: u32, r: u32) -> Result<Self> {
        let k = Modulus::new(k)?;
        if r >= u32::from(k.get()) {
            return Err(Error::InvalidInput(format!("target r={r} not below k={}", k.get())));
        }
        Ok(Self { k, r: r as u8 })
    }

    pub fn check_inputs(&self, inputs: &[u8]) -> Result<()> {
        if inputs.is_empty() {
            return Err(Error::InvalidInput("empty input vector".to_string()));
        }
        if let Some(bad) = inputs.iter().find(|&&i| !self.k.contains(i)) {
            return Err(Error::InvalidInput(format!(
                "input {bad} outside Z_{}",
                self.k.get()
            )));
        }
        Ok(())
    }
}

/// Ground truth of the Remainder predicate.
pub fn remainder_oracle(inputs: &[u8], params: &RemainderParams) -> Result<bool> {
    params.check_inputs(inputs)?;
    Ok(params.k.sum(inputs.iter().copied()) == params.r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn oracle_examples() {
        let p = RemainderParams::new(4, 2).unwrap();
        assert_eq!(remainder_oracle(&[1, 2, 3], &p), Ok(true));
        let p = RemainderParams::new(5, 0).unwrap();
        assert_eq!(remainder_oracle(&[0; 7], &p), Ok(true));
        assert!(remainder_oracle(&[], &p).is_err());
        assert!(remainder_oracle(&[5], &p).is_err());
        assert!(RemainderParams::new(3, 3).is_err());
    }

    #[test]
    fn oracle_matches_repeated_increment() {
        // Independent route: count up one unit at a time with wraparound.
        let mut rng = ChaCha8Rng::seed_from_u64(1000);
        for _ in 0..1000 {
            let k: u32 = rng.gen_range(2..=7);
            let n = rng.gen_range(1..=8);
            let r: u32 = rng.gen_range(0..k);
            let inputs: Vec<u8> = (0..n).map(|_| rng.gen_range(0..k) as u8).collect();
            let mut acc = 0u32;
            for &i in &inputs {
                for _ in 0..i {
                    acc += 1;
                    if acc == k {
                        acc = 0;
                    }
                }
            }
            let p = RemainderParams::new(k, r).unwrap();
            assert_eq!(remainder_oracle(&inputs, &p).unwrap(), acc == r);
        }
    }
}
