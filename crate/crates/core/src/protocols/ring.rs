//! Sequential ring protocol used as a reference for what a private
//! Remainder computation may reveal.
//!
//! Agent 0 adds a uniform `r` to its input and passes the sum on. Every
//! other agent adds its input and passes the result to the next agent. The
//! total comes back to agent 0, which subtracts `r` and announces the sum.

use rand::Rng;
use serde::Serialize;

use crate::{Error, Modulus, Result};

/// What one agent learns: its input, the single message it receives and
/// the announced answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RingView {
    pub input: u8,
    pub received: u8,
    pub answer: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RingRun {
    /// `sum mod k`.
    pub answer: u8,
    /// One view per agent; agent 0 receives the blinded total.
    pub views: Vec<RingView>,
}

pub fn ring_remainder_oracle<R: Rng + ?Sized>(
    inputs: &[u8],
    k: Modulus,
    rng: &mut R,
) -> Result<RingRun> {
    if inputs.len() < 2 {
        return Err(Error::InvalidPopulation(inputs.len()));
    }
    if let Some(bad) = inputs.iter().find(|&&i| !k.contains(i)) {
        return Err(Error::InvalidInput(format!("input {bad} outside Z_{}", k.get())));
    }
    let blind = k.sample(rng);
    let mut received = vec![0u8; inputs.len()];
    let mut carry = k.add(inputs[0], blind);
    for (j, &input) in inputs.iter().enumerate().skip(1) {
        received[j] = carry;
        carry = k.add(carry, input);
    }
    received[0] = carry;
    let answer = k.sub(carry, blind);
    let views = inputs
        .iter()
        .zip(&received)
        .map(|(&input, &received)| RingView { input, received, answer })
        .collect();
    Ok(RingRun { answer, views })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Streams;

    #[test]
    fn blind_cancels() {
        let k = Modulus::new(4).unwrap();
        let mut rng = Streams::new(9).aux(0);
        for _ in 0..50 {
            let run = ring_remainder_oracle(&[1, 2, 3], k, &mut rng).unwrap();
            assert_eq!(run.answer, 2);
            assert!(run.views.iter().all(|v| v.answer == 2));
        }
    }

    #[test]
    fn two_zero_inputs_see_the_blind() {
        let k = Modulus::new(5).unwrap();
        let mut rng = Streams::new(10).aux(0);
        let run = ring_remainder_oracle(&[0, 0], k, &mut rng).unwrap();
        assert_eq!(run.answer, 0);
        assert_eq!(run.views[0].received, run.views[1].received);
    }

    #[test]
    fn rejects_bad_inputs() {
        let k = Modulus::new(3).unwrap();
        let mut rng = Streams::new(11).aux(0);
        assert!(ring_remainder_oracle(&[1], k, &mut rng).is_err());
        assert!(ring_remainder_oracle(&[1, 3], k, &mut rng).is_err());
    }
}
