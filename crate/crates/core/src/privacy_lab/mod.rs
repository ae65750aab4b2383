//! Privacy experiments: a designated agent records what it sees and
//! statistical tests decide whether that view depends on other agents'
//! inputs.
//!
//! A "leaks" verdict is evidence of dependence. "no-evidence" only means
//! the test could not tell the distributions apart at the sample size used.

pub mod attacks;
pub mod calibration;
pub mod freshness;
pub mod histogram;
pub mod observable;
pub mod stats;
pub mod transfer;

pub use attacks::{
    check_view_pair, first_partner_attack, random_inputs, score_guesses, view_distribution_report,
    view_distribution_test, view_features, AttackConfig, AttackReport, Verdict,
};
pub use calibration::{null_calibration, CalibrationReport, CalibrationSizes};
pub use freshness::{freshness_monte_carlo, freshness_probability};
pub use histogram::{total_variation, Feature, Histogram};
pub use observable::{cubic_budget, Observable};
pub use stats::{
    binomial_se, chi_square_counts, chi_square_uniform, exceeds_baseline, permutation_tv_test, ChiSquareTest,
    PermutationTest, DEFAULT_SHUFFLES, MIN_TRIALS,
};
pub use transfer::{p2p_uniformity, EmittedValue, TransferReport, UNIFORMITY_ALPHA};
