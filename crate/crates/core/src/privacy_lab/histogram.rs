use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::{Error, Result};

/// Empirical distribution over discrete features.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Histogram<K: Ord> {
    bins: BTreeMap<K, u64>,
    total: u64,
}

impl<K: Ord> Default for Histogram<K> {
    fn default() -> Self {
        Self { bins: BTreeMap::new(), total: 0 }
    }
}

impl<K: Ord> Histogram<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: K) {
        self.add_count(key, 1);
    }

    pub fn add_count(&mut self, key: K, count: u64) {
        if count > 0 {
            *self.bins.entry(key).or_insert(0) += count;
            self.total += count;
        }
    }

    /// Bin-wise sum.
    pub fn merge(&mut self, other: Histogram<K>) {
        for (key, count) in other.bins {
            self.add_count(key, count);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, key: &K) -> u64 {
        self.bins.get(key).copied().unwrap_or(0)
    }

    pub fn probability(&self, key: &K) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(key) as f64 / self.total as f64
        }
    }

    /// Number of non-empty bins.
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> {
        self.bins.iter().map(|(k, &c)| (k, c))
    }
}

impl<K: Ord> FromIterator<K> for Histogram<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut h = Histogram::new();
        for key in iter {
            h.add(key);
        }
        h
    }
}

/// Half the L1 distance between the two normalized histograms.
pub fn total_variation<K: Ord>(a: &Histogram<K>, b: &Histogram<K>) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let (ta, tb) = (a.total as f64, b.total as f64);
    let mut sum = 0.0;
    for (key, &ca) in &a.bins {
        sum += (ca as f64 / ta - b.count(key) as f64 / tb).abs();
    }
    for (key, &cb) in &b.bins {
        if !a.bins.contains_key(key) {
            sum += cb as f64 / tb;
        }
    }
    Ok((sum / 2.0).min(1.0))
}

/// A prefix of visible values observed by the adversary.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Feature(pub Vec<u32>);

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
