//! Monte Carlo attacks of a single semi-honest agent.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::histogram::Feature;
use super::observable::Observable;
use super::stats::{exceeds_baseline, permutation_tv_test, DEFAULT_SHUFFLES, MIN_TRIALS};
use crate::engine::{run_trials, Capture, Execution, RunOptions, Streams};
use crate::protocols::remainder_oracle;
use crate::{Error, Modulus, Result};

// Auxiliary stream labels.
const INPUT_DRAW: u64 = 1;
const SHUFFLE: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Leaks,
    NoEvidence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackReport {
    pub protocol: String,
    pub attack: String,
    pub n: usize,
    pub k: u8,
    /// Runs requested.
    pub trials: u64,
    /// Runs that entered the statistic (all of them, unless only
    /// successful runs count).
    pub samples: u64,
    pub accuracy: f64,
    pub baseline: f64,
    pub tv_distance: f64,
    pub verdict: Verdict,
    /// Leak threshold on `tv_distance`, for the permutation test.
    pub null_threshold: Option<f64>,
    pub p_value: Option<f64>,
}

/// Population layout and sampling effort of an attack.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackConfig {
    pub n: usize,
    pub adversary: usize,
    /// Defaults to the lowest index that is not the adversary.
    pub leader: Option<usize>,
    pub trials: u64,
    /// Steps per run; defaults to the protocol's own budget.
    pub budget: Option<u64>,
    /// Number of observations in a view feature.
    pub feature_len: usize,
    pub shuffles: usize,
}

impl AttackConfig {
    pub fn new(n: usize, trials: u64) -> Self {
        Self {
            n,
            adversary: 0,
            leader: None,
            trials,
            budget: None,
            feature_len: 8,
            shuffles: DEFAULT_SHUFFLES,
        }
    }

    pub fn resolved_leader(&self) -> usize {
        self.leader.unwrap_or(usize::from(self.adversary == 0))
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidPopulation(self.n));
        }
        if self.adversary >= self.n || self.resolved_leader() >= self.n {
            return Err(Error::InvalidExperiment(format!(
                "adversary {} or leader {} outside 0..{}",
                self.adversary,
                self.resolved_leader(),
                self.n
            )));
        }
        if self.trials < MIN_TRIALS {
            return Err(Error::InsufficientSamples { needed: MIN_TRIALS, got: self.trials });
        }
        Ok(())
    }
}

/// Messages the adversary received, and who sent the first one.
struct Observed<M> {
    first_partner: usize,
    messages: Vec<M>,
}

/// Runs one execution and returns the adversary's first `want`
/// observations. Protocols that require success are run to completion and
/// `None` is returned for failed runs.
fn observe<P: Observable>(
    proto: &P,
    cfg: &AttackConfig,
    values: &[u8],
    want: usize,
    streams: &Streams,
) -> Result<Option<Observed<P::Message>>> {
    let adv = cfg.adversary;
    let budget = cfg.budget.unwrap_or_else(|| proto.default_budget(cfg.n));
    let inputs = proto.make_inputs(values, cfg.resolved_leader())?;
    let mut exec = Execution::new(proto, inputs, streams)?.capture(Capture::Agents(vec![adv]));
    let mut first_partner = None;
    if proto.requires_success() {
        let done = exec.advance_with(&RunOptions::until_converged(budget), |rec, _| {
            if first_partner.is_none() {
                first_partner = rec.partner_of(adv);
            }
        })?;
        if !done || !proto.succeeded(exec.agents(), values) {
            return Ok(None);
        }
    } else {
        let seen = |e: &Execution<'_, P>| e.view(adv).map_or(0, |v| v.len());
        while seen(&exec) < want && exec.steps() < budget {
            let rec = exec.step()?;
            if first_partner.is_none() {
                first_partner = rec.partner_of(adv);
            }
        }
    }
    let view = exec.view(adv).expect("adversary view is captured");
    let Some(first_partner) = first_partner else {
        return Ok(None);
    };
    let messages = view.partner_messages().take(want).cloned().collect();
    Ok(Some(Observed { first_partner, messages }))
}

/// Accuracy, TV distance between the joint law of (guess, truth) and the
/// product of its marginals, and the 3-standard-error verdict.
pub fn score_guesses(pairs: &[(u8, u8)], k: u8) -> Result<(f64, f64, Verdict)> {
    if (pairs.len() as u64) < MIN_TRIALS {
        return Err(Error::InsufficientSamples { needed: MIN_TRIALS, got: pairs.len() as u64 });
    }
    let kk = usize::from(k);
    let total = pairs.len() as f64;
    let mut joint = vec![0u64; kk * kk];
    let (mut rows, mut cols) = (vec![0u64; kk], vec![0u64; kk]);
    let mut hits = 0u64;
    for &(g, t) in pairs {
        let (g, t) = (usize::from(g), usize::from(t));
        if g >= kk || t >= kk {
            return Err(Error::InvalidInput(format!("guess {g} or truth {t} outside Z_{k}")));
        }
        joint[g * kk + t] += 1;
        rows[g] += 1;
        cols[t] += 1;
        hits += u64::from(g == t);
    }
    let mut tv = 0.0;
    for g in 0..kk {
        for t in 0..kk {
            let p = joint[g * kk + t] as f64 / total;
            let q = rows[g] as f64 / total * (cols[t] as f64 / total);
            tv += (p - q).abs();
        }
    }
    let accuracy = hits as f64 / total;
    let baseline = 1.0 / f64::from(k);
    let verdict = if exceeds_baseline(accuracy, baseline, pairs.len() as u64) {
        Verdict::Leaks
    } else {
        Verdict::NoEvidence
    };
    Ok((accuracy, tv / 2.0, verdict))
}

/// The adversary holds `adversary_input`, every other agent draws its input
/// uniformly, and the adversary guesses its first partner's input from the
/// first message it sees.
pub fn first_partner_attack<P: Observable>(
    proto: &P,
    cfg: &AttackConfig,
    adversary_input: u8,
    streams: &Streams,
) -> Result<AttackReport> {
    cfg.validate()?;
    let k = proto.params().k;
    if !k.contains(adversary_input) {
        return Err(Error::InvalidInput(format!("adversary input {adversary_input} outside Z_{}", k.get())));
    }
    let results = run_trials(streams, cfg.trials, |_, s| {
        let values =
            random_inputs(cfg.n, k, cfg.adversary, adversary_input, &mut s.aux(INPUT_DRAW));
        let seen = observe(proto, cfg, &values, 1, &s)?;
        Ok(seen.and_then(|o| {
            let msg = o.messages.first()?;
            Some((proto.guess(msg), values[o.first_partner]))
        }))
    });
    let pairs: Vec<(u8, u8)> =
        results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let (accuracy, tv_distance, verdict) = score_guesses(&pairs, k.get())?;
    Ok(AttackReport {
        protocol: P::NAME.to_string(),
        attack: "first-partner".to_string(),
        n: cfg.n,
        k: k.get(),
        trials: cfg.trials,
        samples: pairs.len() as u64,
        accuracy,
        baseline: 1.0 / f64::from(k.get()),
        tv_distance,
        verdict,
        null_threshold: None,
        p_value: None,
    })
}

/// Adversary view features (first `feature_len` visible values) over
/// `cfg.trials` runs on fixed inputs. Failed runs are skipped when the
/// protocol requires success.
pub fn view_features<P: Observable>(
    proto: &P,
    cfg: &AttackConfig,
    values: &[u8],
    streams: &Streams,
) -> Result<Vec<Feature>> {
    if values.len() != cfg.n {
        return Err(Error::InvalidExperiment(format!(
            "{} inputs for a population of {}",
            values.len(),
            cfg.n
        )));
    }
    let results = run_trials(streams, cfg.trials, |_, s| {
        let seen = observe(proto, cfg, values, cfg.feature_len, &s)?;
        Ok(seen.map(|o| Feature(o.messages.iter().map(|m| proto.symbol(m)).collect())))
    });
    Ok(results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

/// Checks that two input vectors are indistinguishable to an ideal
/// adversary: same size, same adversary input, same predicate value.
pub fn check_view_pair<P: Observable>(
    proto: &P,
    cfg: &AttackConfig,
    i1: &[u8],
    i2: &[u8],
) -> Result<()> {
    let params = proto.params();
    if i1.len() != cfg.n || i2.len() != cfg.n {
        return Err(Error::InvalidExperiment("input vectors must have n entries".to_string()));
    }
    if i1[cfg.adversary] != i2[cfg.adversary] {
        return Err(Error::InvalidExperiment("adversary inputs differ".to_string()));
    }
    if remainder_oracle(i1, &params)? != remainder_oracle(i2, &params)? {
        return Err(Error::InvalidExperiment("predicate values differ".to_string()));
    }
    Ok(())
}

/// Two-sample test between the adversary's view features under `i1` and
/// under `i2`, each sampled `cfg.trials` times.
pub fn view_distribution_test<P: Observable>(
    proto: &P,
    cfg: &AttackConfig,
    i1: &[u8],
    i2: &[u8],
    streams: &Streams,
) -> Result<AttackReport> {
    cfg.validate()?;
    check_view_pair(proto, cfg, i1, i2)?;
    let a = view_features(proto, cfg, i1, &streams.trial(1))?;
    let b = view_features(proto, cfg, i2, &streams.trial(2))?;
    view_distribution_report(proto, cfg, &a, &b, streams)
}

/// The view-distribution verdict for already collected features. With the
/// features drawn as in [`view_distribution_test`] the report is identical.
pub fn view_distribution_report<P: Observable>(
    proto: &P,
    cfg: &AttackConfig,
    a: &[Feature],
    b: &[Feature],
    streams: &Streams,
) -> Result<AttackReport> {
    let (ids_a, ids_b) = intern(a, b);
    let test = permutation_tv_test(&ids_a, &ids_b, cfg.shuffles, &mut streams.aux(SHUFFLE))?;
    Ok(AttackReport {
        protocol: P::NAME.to_string(),
        attack: "view-distribution".to_string(),
        n: cfg.n,
        k: proto.params().k.get(),
        trials: cfg.trials,
        samples: (a.len() + b.len()) as u64,
        // Best achievable accuracy of telling the two input vectors apart
        // from one feature, with equal priors.
        accuracy: 0.5 + test.observed / 2.0,
        baseline: 0.5,
        tv_distance: test.observed,
        verdict: if test.leaks { Verdict::Leaks } else { Verdict::NoEvidence },
        null_threshold: Some(test.threshold),
        p_value: Some(test.p_value),
    })
}

fn intern(a: &[Feature], b: &[Feature]) -> (Vec<u32>, Vec<u32>) {
    let mut ids: HashMap<&Feature, u32> = HashMap::new();
    let mut id_of = |f| {
        let next = ids.len() as u32;
        *ids.entry(f).or_insert(next)
    };
    let ia = a.iter().map(&mut id_of).collect();
    let ib = b.iter().map(&mut id_of).collect();
    (ia, ib)
}

/// Input vector with `n` uniform entries except the adversary's.
pub fn random_inputs<R: Rng + ?Sized>(
    n: usize,
    k: Modulus,
    adversary: usize,
    adversary_input: u8,
    rng: &mut R,
) -> Vec<u8> {
    (0..n).map(|j| if j == adversary { adversary_input } else { k.sample(rng) }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{Alg1, RemainderParams};

    #[test]
    fn scoring_perfect_and_independent_guesses() {
        let pairs: Vec<(u8, u8)> = (0..2000).map(|i| ((i % 4) as u8, (i % 4) as u8)).collect();
        let (acc, tv, verdict) = score_guesses(&pairs, 4).unwrap();
        assert_eq!(acc, 1.0);
        assert!((tv - 0.75).abs() < 1e-12);
        assert_eq!(verdict, Verdict::Leaks);
        // Guess and truth cycle independently: every combination once.
        let pairs: Vec<(u8, u8)> = (0..1600).map(|i| ((i % 4) as u8, ((i / 4) % 4) as u8)).collect();
        let (acc, tv, verdict) = score_guesses(&pairs, 4).unwrap();
        assert_eq!(acc, 0.25);
        assert!(tv.abs() < 1e-12);
        assert_eq!(verdict, Verdict::NoEvidence);
        assert!(score_guesses(&pairs[..999], 4).is_err());
    }

    #[test]
    fn rejects_invalid_pairs_and_small_samples() {
        let alg = Alg1::new(RemainderParams::new(4, 0).unwrap(), 0.5).unwrap();
        let cfg = AttackConfig::new(4, 1000);
        assert!(check_view_pair(&alg, &cfg, &[1, 0, 3, 0], &[1, 1, 2, 0]).is_ok());
        assert!(check_view_pair(&alg, &cfg, &[1, 0, 3, 0], &[2, 0, 2, 0]).is_err());
        assert!(check_view_pair(&alg, &cfg, &[1, 0, 3, 0], &[1, 1, 3, 0]).is_err());
        let small = AttackConfig::new(4, 999);
        assert!(matches!(
            first_partner_attack(&alg, &small, 0, &Streams::new(1)),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn leader_defaults_away_from_adversary() {
        let mut cfg = AttackConfig::new(5, 1000);
        assert_eq!(cfg.resolved_leader(), 1);
        cfg.adversary = 3;
        assert_eq!(cfg.resolved_leader(), 0);
        cfg.leader = Some(4);
        assert_eq!(cfg.resolved_leader(), 4);
    }
}
