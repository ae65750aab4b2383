use popsim::audit::{
    audit_alg1, audit_alg3, audit_scheduler, audit_view_sufficiency, scheduler_uniformity,
};
use popsim::engine::{Execution, RunOptions, Streams};
use popsim::protocols::{Alg1, Alg3, RemainderParams};
use popsim::subroutines::ClockParams;
use proptest::prelude::*;

fn alg3(k: u32) -> Alg3 {
    Alg3::new(RemainderParams::new(k, 0).unwrap(), ClockParams { m: 16 })
}

fn instance(max_n: usize) -> impl Strategy<Value = (u32, Vec<u8>, u64)> {
    (2u32..=6, 3usize..=max_n, any::<u64>()).prop_flat_map(|(k, n, seed)| {
        (Just(k), proptest::collection::vec(0..k as u8, n), Just(seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn alg1_conserves_residue_sum((k, inputs, seed) in instance(10), p in 0.0f64..=1.0) {
        let alg = Alg1::new(RemainderParams::new(k, 0).unwrap(), p).unwrap();
        audit_alg1(&alg, inputs, &Streams::new(seed), 3000).unwrap();
    }

    #[test]
    fn alg3_token_and_ledger((k, inputs, seed) in instance(8), leader in 0usize..8) {
        let leader = leader % inputs.len();
        let summary = audit_alg3(&alg3(k), &inputs, leader, &Streams::new(seed), 200_000).unwrap();
        prop_assert!(summary.converged);
    }

    #[test]
    fn views_replay_alg1((k, inputs, seed) in instance(8)) {
        let alg = Alg1::new(RemainderParams::new(k, 1 % k).unwrap(), 0.5).unwrap();
        audit_view_sufficiency(&alg, inputs, &Streams::new(seed), 300).unwrap();
    }

    #[test]
    fn views_replay_alg3((k, inputs, seed) in instance(8)) {
        let alg = alg3(k);
        let inputs = Alg3::inputs(&inputs, 0).unwrap();
        audit_view_sufficiency(&alg, inputs, &Streams::new(seed), 600).unwrap();
    }

    #[test]
    fn scheduler_pairs_are_well_formed(n in 2usize..=64, seed in any::<u64>()) {
        audit_scheduler(n, 1000, &mut Streams::new(seed).scheduler()).unwrap();
    }
}

#[test]
fn scheduler_is_uniform_over_ordered_pairs() {
    for n in 2..=16 {
        let test = scheduler_uniformity(n, 1_000_000, &mut Streams::new(n as u64).scheduler()).unwrap();
        assert!(test.p_value > 0.001, "n={n}: {test:?}");
    }
}

#[test]
fn equal_seeds_give_equal_runs() {
    let alg = alg3(5);
    let values = [4, 1, 0, 3, 2, 2];
    let run = |seed| {
        Execution::new(&alg, Alg3::inputs(&values, 2).unwrap(), &Streams::new(seed))
            .unwrap()
            .record_trace(true)
            .run(&RunOptions::until_converged(1_000_000))
            .unwrap()
    };
    let (a, b, c) = (run(8), run(8), run(9));
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.final_config, b.final_config);
    assert_ne!(a.trace, c.trace);
}
