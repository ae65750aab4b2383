use rand::Rng;

use super::AgentRng;
use crate::{Error, Result};

/// Draws an ordered pair of distinct agents uniformly among the n(n-1)
/// ordered pairs.
pub fn select_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(Error::InvalidPopulation(n));
    }
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    Ok((i, j))
}

/// Uniform random scheduler over a fixed population.
#[derive(Clone, Debug)]
pub struct Scheduler {
    n: usize,
    rng: AgentRng,
}

impl Scheduler {
    pub fn new(n: usize, rng: AgentRng) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPopulation(n));
        }
        Ok(Self { n, rng })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn next_pair(&mut self) -> (usize, usize) {
        // n >= 2 is checked at construction.
        select_pair(self.n, &mut self.rng).expect("population checked at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Streams;

    #[test]
    fn rejects_small_population() {
        let mut rng = Streams::new(1).scheduler();
        assert_eq!(select_pair(1, &mut rng), Err(Error::InvalidPopulation(1)));
        assert_eq!(select_pair(0, &mut rng), Err(Error::InvalidPopulation(0)));
        assert!(Scheduler::new(1, Streams::new(1).scheduler()).is_err());
    }

    #[test]
    fn two_agents_yield_both_orders() {
        let mut rng = Streams::new(3).scheduler();
        let mut counts = [0u32; 2];
        for _ in 0..10_000 {
            match select_pair(2, &mut rng).unwrap() {
                (0, 1) => counts[0] += 1,
                (1, 0) => counts[1] += 1,
                other => panic!("unexpected pair {other:?}"),
            }
        }
        // 1/2 each; 5 sigma is 250.
        assert!((counts[0] as i64 - 5_000).abs() < 250, "{counts:?}");
    }

    #[test]
    fn pairs_are_distinct_and_in_range() {
        let mut rng = Streams::new(9).scheduler();
        for n in 2..20 {
            for _ in 0..1_000 {
                let (i, j) = select_pair(n, &mut rng).unwrap();
                assert!(i < n && j < n && i != j);
            }
        }
    }
}
