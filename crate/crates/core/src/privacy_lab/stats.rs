use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Modulus, Result};

/// Smallest sample size accepted by the accuracy-style attacks.
pub const MIN_TRIALS: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: u32,
    pub p_value: f64,
}

/// Pearson goodness of fit of `samples` against the uniform law on `Z_k`.
pub fn chi_square_uniform(samples: &[u8], k: Modulus) -> Result<ChiSquareTest> {
    let kk = usize::from(k.get());
    if samples.len() < 10 * kk {
        return Err(Error::InsufficientSamples { needed: 10 * kk as u64, got: samples.len() as u64 });
    }
    let mut counts = vec![0u64; kk];
    for &s in samples {
        if !k.contains(s) {
            return Err(Error::InvalidInput(format!("sample {s} outside Z_{kk}")));
        }
        counts[usize::from(s)] += 1;
    }
    chi_square_counts(&counts)
}

/// Pearson goodness of fit of category counts against equal probabilities.
pub fn chi_square_counts(counts: &[u64]) -> Result<ChiSquareTest> {
    let total: u64 = counts.iter().sum();
    if counts.len() < 2 || total == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: total });
    }
    let expected = total as f64 / counts.len() as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = counts.len() as u32 - 1;
    let dist = ChiSquared::new(f64::from(dof))
        .map_err(|e| Error::InvalidExperiment(e.to_string()))?;
    Ok(ChiSquareTest { statistic, dof, p_value: dist.sf(statistic).clamp(0.0, 1.0) })
}

/// Standard error of a binomial proportion.
pub fn binomial_se(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// One-sided test: does the hit rate exceed `baseline` by more than three
/// standard errors under the baseline?
pub fn exceeds_baseline(accuracy: f64, baseline: f64, trials: u64) -> bool {
    accuracy - baseline > 3.0 * binomial_se(baseline, trials)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PermutationTest {
    /// TV distance between the two observed samples.
    pub observed: f64,
    /// Upper 99.9% point of the label-shuffled null.
    pub threshold: f64,
    /// `(1 + #{null >= observed}) / (1 + shuffles)`.
    pub p_value: f64,
    pub leaks: bool,
}

/// Default number of label shuffles; with 999 the 99.9% point is the null
/// maximum.
pub const DEFAULT_SHUFFLES: usize = 999;

/// Two-sample test of equal distributions on interned feature ids. The
/// statistic is the empirical TV distance; the null is obtained by
/// reassigning the pooled samples to the two groups at random.
pub fn permutation_tv_test<R: Rng + ?Sized>(
    a: &[u32],
    b: &[u32],
    shuffles: usize,
    rng: &mut R,
) -> Result<PermutationTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    if shuffles == 0 {
        return Err(Error::InvalidExperiment("permutation test needs shuffles".to_string()));
    }
    let mut pooled: Vec<u32> = a.iter().chain(b).copied().collect();
    let bins = pooled.iter().max().map_or(0, |&m| m as usize + 1);
    let mut counts = vec![0i64; bins];
    let observed = split_tv(&pooled, a.len(), &mut counts);

    let mut null = Vec::with_capacity(shuffles);
    for _ in 0..shuffles {
        // Partial Fisher-Yates: a uniform random subset of size |a| in front.
        for i in 0..a.len() {
            let j = rng.gen_range(i..pooled.len());
            pooled.swap(i, j);
        }
        null.push(split_tv(&pooled, a.len(), &mut counts));
    }
    null.sort_by(f64::total_cmp);
    let rank = ((0.999 * shuffles as f64).ceil() as usize).clamp(1, shuffles);
    let threshold = null[rank - 1];
    let at_least = null.iter().filter(|&&t| t >= observed - 1e-12).count();
    Ok(PermutationTest {
        observed,
        threshold,
        p_value: (1 + at_least) as f64 / (1 + shuffles) as f64,
        leaks: observed > threshold + 1e-12,
    })
}

fn split_tv(pooled: &[u32], split: usize, counts: &mut [i64]) -> f64 {
    let (na, nb) = (split as i64, (pooled.len() - split) as i64);
    counts.iter_mut().for_each(|c| *c = 0);
    // Scale both groups to a common denominator to stay in integers.
    for &x in &pooled[..split] {
        counts[x as usize] += nb;
    }
    for &x in &pooled[split..] {
        counts[x as usize] -= na;
    }
    let l1: i64 = counts.iter().map(|c| c.abs()).sum();
    l1 as f64 / (2 * na * nb) as f64
}
