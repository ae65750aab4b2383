//! Probability that an agent's first partner has never interacted before.

use crate::engine::{run_trials, select_pair, Streams};
use crate::{Error, Result};

/// Closed form `(n-1)/(2n-3)`.
pub fn freshness_probability(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidPopulation(n));
    }
    Ok((n - 1) as f64 / (2 * n - 3) as f64)
}

/// Monte Carlo estimate from raw scheduler draws: agent 0 waits for its
/// first interaction, and the partner counts as fresh if it has not been
/// scheduled before.
pub fn freshness_monte_carlo(n: usize, trials: u64, streams: &Streams) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidPopulation(n));
    }
    if trials == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    // Batches keep the per-trial overhead of stream setup low.
    const BATCH: u64 = 1000;
    let batches = trials.div_ceil(BATCH);
    let fresh: Vec<Result<u64>> = run_trials(streams, batches, |b, s| {
        let mut rng = s.scheduler();
        let mut touched = vec![false; n];
        let mut hits = 0;
        for _ in 0..BATCH.min(trials - b * BATCH) {
            touched.iter_mut().for_each(|t| *t = false);
            loop {
                let (i, j) = select_pair(n, &mut rng)?;
                if i == 0 || j == 0 {
                    let partner = i + j;
                    hits += u64::from(!touched[partner]);
                    break;
                }
                touched[i] = true;
                touched[j] = true;
            }
        }
        Ok(hits)
    });
    let hits: u64 = fresh.into_iter().sum::<Result<u64>>()?;
    Ok(hits as f64 / trials as f64)
}
