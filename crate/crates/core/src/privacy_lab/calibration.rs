//! False-positive rates of the distinguishers on data without any signal.

use rand::Rng;
use serde::Serialize;

use super::attacks::{score_guesses, Verdict};
use super::stats::{chi_square_uniform, permutation_tv_test, DEFAULT_SHUFFLES};
use super::transfer::UNIFORMITY_ALPHA;
use crate::engine::{run_trials, Streams};
use crate::{Modulus, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub repetitions: u64,
    /// False "leaks" per distinguisher.
    pub first_partner: u64,
    pub view_distribution: u64,
    pub chi_square: u64,
}

impl CalibrationReport {
    pub fn max_rate(&self) -> f64 {
        let worst = self.first_partner.max(self.view_distribution).max(self.chi_square);
        worst as f64 / self.repetitions as f64
    }
}

/// Sample sizes of one calibration repetition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CalibrationSizes {
    pub guesses: usize,
    pub features_per_side: usize,
    pub uniform_samples: usize,
}

impl Default for CalibrationSizes {
    fn default() -> Self {
        Self { guesses: 10_000, features_per_side: 1000, uniform_samples: 10_000 }
    }
}

/// Feeds every distinguisher two samples from one distribution:
/// guesses independent of the truth, two feature samples from one skewed
/// law, and uniform values.
pub fn null_calibration(
    repetitions: u64,
    sizes: CalibrationSizes,
    streams: &Streams,
) -> Result<CalibrationReport> {
    let outcomes = run_trials(streams, repetitions, |rep, s| -> Result<[bool; 3]> {
        let mut rng = s.aux(0);
        let k: u8 = if rep % 2 == 0 { 2 } else { 4 };
        let pairs: Vec<(u8, u8)> =
            (0..sizes.guesses).map(|_| (rng.gen_range(0..k), rng.gen_range(0..k))).collect();
        let fp = score_guesses(&pairs, k)?.2 == Verdict::Leaks;

        // A geometric-looking law on 32 features.
        let draw = |rng: &mut crate::engine::AgentRng| -> u32 {
            let mut x = 0;
            while x < 31 && rng.gen_bool(0.7) {
                x += 1;
            }
            x
        };
        let a: Vec<u32> = (0..sizes.features_per_side).map(|_| draw(&mut rng)).collect();
        let b: Vec<u32> = (0..sizes.features_per_side).map(|_| draw(&mut rng)).collect();
        let vd = permutation_tv_test(&a, &b, DEFAULT_SHUFFLES, &mut rng)?.leaks;

        let modulus = Modulus::new(u32::from(2 * k))?;
        let uniform: Vec<u8> =
            (0..sizes.uniform_samples).map(|_| modulus.sample(&mut rng)).collect();
        let cs = chi_square_uniform(&uniform, modulus)?.p_value <= UNIFORMITY_ALPHA;
        Ok([fp, vd, cs])
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let count = |i: usize| outcomes.iter().filter(|o| o[i]).count() as u64;
    Ok(CalibrationReport {
        repetitions,
        first_partner: count(0),
        view_distribution: count(1),
        chi_square: count(2),
    })
}
