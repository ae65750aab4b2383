use popsim::engine::Streams;
use popsim::privacy_lab::{
    chi_square_uniform, first_partner_attack, freshness_monte_carlo, freshness_probability,
    null_calibration, view_distribution_test, AttackConfig, CalibrationSizes, Verdict,
};
use popsim::protocols::{alg3_input, ring_remainder_oracle, Alg1, Alg3, Alg3Input, RemainderParams};
use popsim::subroutines::ClockParams;
use popsim::Modulus;

#[test]
fn freshness_estimate_matches_closed_form() {
    for n in [3, 10] {
        let est = freshness_monte_carlo(n, 100_000, &Streams::new(n as u64)).unwrap();
        let exact = freshness_probability(n).unwrap();
        assert!((est - exact).abs() < 0.005, "n={n}: {est} vs {exact}");
    }
}

#[test]
fn unit_transfer_protocol_leaks_first_partner() {
    let alg = Alg1::new(RemainderParams::new(3, 0).unwrap(), 0.5).unwrap();
    let report = first_partner_attack(&alg, &AttackConfig::new(6, 5000), 1, &Streams::new(5)).unwrap();
    assert_eq!(report.verdict, Verdict::Leaks);
    assert!(report.accuracy > 0.5);
}

#[test]
fn token_protocol_first_partner_is_blind() {
    let alg = Alg3::new(RemainderParams::new(3, 0).unwrap(), ClockParams { m: 16 });
    let report = first_partner_attack(&alg, &AttackConfig::new(6, 3000), 1, &Streams::new(6)).unwrap();
    assert_eq!(report.verdict, Verdict::NoEvidence);
    assert!(report.samples >= 2950);
}

#[test]
fn identical_inputs_show_no_view_difference() {
    let alg = Alg1::new(RemainderParams::new(4, 0).unwrap(), 0.5).unwrap();
    let mut cfg = AttackConfig::new(6, 3000);
    cfg.feature_len = 2;
    let inputs = [1, 0, 3, 2, 1, 0];
    let report = view_distribution_test(&alg, &cfg, &inputs, &inputs, &Streams::new(7)).unwrap();
    assert_eq!(report.verdict, Verdict::NoEvidence);
    assert!(report.tv_distance <= report.null_threshold.unwrap() + 1e-12);
}

#[test]
fn view_test_rejects_pairs_with_different_answers() {
    let alg = Alg1::new(RemainderParams::new(4, 0).unwrap(), 0.5).unwrap();
    let cfg = AttackConfig::new(4, 1000);
    let err = view_distribution_test(&alg, &cfg, &[0, 0, 0, 0], &[0, 1, 0, 0], &Streams::new(1));
    assert!(matches!(err, Err(popsim::Error::InvalidExperiment(_))));
}

#[test]
fn leader_secret_is_uniform() {
    let k = Modulus::new(5).unwrap();
    let mut rng = Streams::new(77).aux(0);
    let draws: Vec<u8> = (0..100_000)
        .map(|_| alg3_input(k, Alg3Input { value: 3, leader: true }, &mut rng).hidden.mu.unwrap())
        .collect();
    assert!(chi_square_uniform(&draws, k).unwrap().p_value > 0.001);
}

#[test]
fn ring_messages_are_uniform() {
    let k = Modulus::new(4).unwrap();
    let mut rng = Streams::new(78).aux(0);
    let inputs = [1, 2, 3, 0, 2];
    let mut per_agent = vec![Vec::new(); inputs.len()];
    for _ in 0..100_000 {
        let run = ring_remainder_oracle(&inputs, k, &mut rng).unwrap();
        assert_eq!(run.answer, 0);
        for (j, v) in run.views.iter().enumerate() {
            per_agent[j].push(v.received);
        }
    }
    for samples in &per_agent {
        assert!(chi_square_uniform(samples, k).unwrap().p_value > 0.001);
    }
}

#[test]
fn distinguishers_are_calibrated_on_small_null() {
    let sizes = CalibrationSizes { guesses: 2000, features_per_side: 300, uniform_samples: 2000 };
    let report = null_calibration(100, sizes, &Streams::new(79)).unwrap();
    assert!(report.first_partner <= 2 && report.view_distribution <= 2 && report.chi_square <= 2, "{report:?}");
}
