use rayon::prelude::*;

use super::Streams;

/// Runs `trials` independent seeded trials in parallel. Trial `t` receives
/// `streams.trial(t)`; results come back in trial order, so the output is a
/// pure function of the root seed regardless of thread count.
pub fn run_trials<T, F>(streams: &Streams, trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, Streams) -> T + Sync + Send,
{
    (0..trials).into_par_iter().map(|t| f(t, streams.trial(t))).collect()
}
