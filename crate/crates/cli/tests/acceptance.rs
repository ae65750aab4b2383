//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use popsim::audit::{
    audit_alg1, audit_alg3, audit_scheduler, audit_view_sufficiency, scheduler_uniformity,
};
use clap::Parser;
use popsim::engine::{run_trials, Execution, RunOptions, Streams};
use popsim::privacy_lab::{
    cubic_budget, first_partner_attack, freshness_monte_carlo, freshness_probability,
    null_calibration, p2p_uniformity, random_inputs, view_distribution_test, AttackConfig,
    CalibrationSizes, Observable, Verdict, UNIFORMITY_ALPHA,
};
use popsim::protocols::{Alg1, Alg3, RemainderParams};
use popsim::subroutines::ClockParams;
use popsim::Modulus;
use popsim_cli::commands::{clock_summary, cmd_convergence};
use popsim_cli::{Cli, ExperimentConfig};
use rand::Rng;

const ALG3_CLOCK: ClockParams = ClockParams { m: 16 };

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn alg3(k: u32) -> Alg3 {
    Alg3::new(RemainderParams::new(k, 0).unwrap(), ALG3_CLOCK)
}

fn alg1(k: u32) -> Alg1 {
    Alg1::new(RemainderParams::new(k, 0).unwrap(), 0.5).unwrap()
}

fn correctness() -> Outcome {
    let start = Instant::now();
    let mut worst = (u64::MAX, 0usize, 0u32);
    for n in [8usize, 16, 32] {
        for k in [2u32, 3, 5] {
            let alg = alg3(k);
            let kk = alg.params.k;
            let streams = Streams::new(1000 + 10 * n as u64 + u64::from(k));
            let ok = run_trials(&streams, 100, |_, s| {
                let values = random_inputs(n, kk, usize::MAX, 0, &mut s.aux(7));
                let inputs = Alg3::inputs(&values, 0).unwrap();
                let mut exec = Execution::new(&alg, inputs, &s).unwrap();
                let done = exec.advance(&RunOptions::until_converged(cubic_budget(n, 20.0))).unwrap();
                done && Alg3::population_sum(exec.agents()) == Some(kk.sum(values))
            });
            let correct = ok.iter().filter(|&&c| c).count() as u64;
            if correct <= worst.0 {
                worst = (correct, n, k);
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst.0 >= 99 && elapsed < Duration::from_secs(300),
        format!("worst cell n={} k={}: {}/100 correct; {:.1}s total", worst.1, worst.2, worst.0, elapsed.as_secs_f64()),
    )
}

fn scaling() -> Outcome {
    let cli = Cli::try_parse_from(["popsim", "convergence", "--ns", "8,16,32,64", "--trials", "30", "--seed", "11"])
        .unwrap();
    let cfg = ExperimentConfig::resolve(&cli.command).unwrap();
    let result = cmd_convergence(&cfg).unwrap();
    let fit = result.fit.expect("four sizes give a fit");
    let medians: Vec<String> = result.rows.iter().map(|r| format!("n={}:{}", r.n, r.median)).collect();
    let all_converged = result.rows.iter().all(|r| !r.flagged);
    outcome(
        (2.6..=3.4).contains(&fit.alpha) && all_converged,
        format!(
            "alpha={:.3} (log-adjusted {:.3}); medians {}",
            fit.alpha,
            fit.alpha_log_adjusted,
            medians.join(" ")
        ),
    )
}

fn freshness() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [3usize, 10, 50] {
        let est = freshness_monte_carlo(n, 100_000, &Streams::new(300 + n as u64)).unwrap();
        let exact = freshness_probability(n).unwrap();
        pass &= (est - exact).abs() <= 0.005;
        parts.push(format!("n={n}: {est:.4} vs {exact:.4}"));
    }
    outcome(pass, parts.join("; "))
}

const I1: [u8; 8] = [1, 0, 3, 2, 1, 0, 2, 3];
const I2: [u8; 8] = [1, 1, 2, 2, 1, 0, 2, 3];

/// First-partner accuracy at k in {2, 4} plus the view test on (I1, I2).
fn attacks<P: Observable>(make: impl Fn(u32) -> P, seed: u64) -> (Vec<Verdict>, String) {
    let mut verdicts = Vec::new();
    let mut parts = Vec::new();
    for k in [2u32, 4] {
        let proto = make(k);
        let r = first_partner_attack(&proto, &AttackConfig::new(10, 100_000), 0, &Streams::new(seed + u64::from(k)))
            .unwrap();
        parts.push(format!("first-partner k={k}: acc {:.4} vs {:.4} ({} runs)", r.accuracy, r.baseline, r.samples));
        verdicts.push(r.verdict);
    }
    let mut cfg = AttackConfig::new(8, 100_000);
    cfg.feature_len = 4;
    let r = view_distribution_test(&make(4), &cfg, &I1, &I2, &Streams::new(seed + 10)).unwrap();
    parts.push(format!(
        "view k=4 n=8: tv {:.4} vs null {:.4}",
        r.tv_distance,
        r.null_threshold.unwrap()
    ));
    verdicts.push(r.verdict);
    (verdicts, parts.join("; "))
}

fn alg1_leaks() -> Outcome {
    let (verdicts, detail) = attacks(alg1, 400);
    outcome(verdicts.iter().all(|&v| v == Verdict::Leaks), detail)
}

fn alg3_private() -> Outcome {
    let (verdicts, detail) = attacks(alg3, 500);
    outcome(verdicts.iter().all(|&v| v == Verdict::NoEvidence), detail)
}

fn p2p() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [2u32, 4, 8] {
        let kk = Modulus::new(k).unwrap();
        let r = p2p_uniformity(kk, 4, kk.get() - 1, 100_000, &Streams::new(600 + u64::from(k))).unwrap();
        let min_p = r.emitted.iter().map(|e| e.test.p_value).fold(1.0, f64::min);
        pass &= r.delivered == r.trials && r.emitted.iter().all(|e| e.test.p_value > UNIFORMITY_ALPHA);
        parts.push(format!("k={k}: delivered {}/{}, min p {:.4}", r.delivered, r.trials, min_p));
    }
    outcome(pass, parts.join("; "))
}

fn probe() -> Outcome {
    let s = clock_summary(32, 8, 10_000, &Streams::new(700)).unwrap();
    outcome(
        s.rounds >= 10_000 && s.accuracy >= 0.99,
        format!(
            "{} rounds, accuracy {:.4} (marked {:.4}, unmarked {:.4}), mean length {:.2} n ln n",
            s.rounds, s.accuracy, s.marked_accuracy, s.unmarked_accuracy, s.mean_length_per_n_ln_n
        ),
    )
}

fn invariants() -> Outcome {
    const RUNS: u64 = 1000;
    let mut rng = Streams::new(800).aux(0);
    let mut failures = Vec::new();
    let mut alg3_runs_converged = 0;
    for run in 0..RUNS {
        let k: u32 = rng.gen_range(2..=6);
        let n: usize = rng.gen_range(3..=10);
        let kk = Modulus::new(k).unwrap();
        let values: Vec<u8> = (0..n).map(|_| kk.sample(&mut rng)).collect();
        let seed: u64 = rng.gen();
        let streams = Streams::new(seed);
        let a1 = alg1(k);
        let a3 = alg3(k);
        let leader = rng.gen_range(0..n);
        let checks = [
            ("alg1 sum/frame", audit_alg1(&a1, values.clone(), &streams, 3000).map(drop)),
            ("alg3 token/ledger/frame", audit_alg3(&a3, &values, leader, &streams, 500_000).map(|s| {
                alg3_runs_converged += u64::from(s.converged);
            })),
            ("alg1 view", audit_view_sufficiency(&a1, values.clone(), &streams, 300)),
            ("alg3 view", audit_view_sufficiency(&a3, Alg3::inputs(&values, leader).unwrap(), &streams, 600)),
            ("scheduler pairs", audit_scheduler(rng.gen_range(2..=64), 1000, &mut streams.scheduler())),
        ];
        for (name, res) in checks {
            if let Err(e) = res {
                failures.push(format!("run {run} {name}: {e}"));
            }
        }
    }
    let mut worst_p: f64 = 1.0;
    for n in 2..=16 {
        let t = scheduler_uniformity(n, 1_000_000, &mut Streams::new(900 + n as u64).scheduler()).unwrap();
        worst_p = worst_p.min(t.p_value);
        if t.p_value <= 0.001 {
            failures.push(format!("scheduler n={n}: p={}", t.p_value));
        }
    }
    let detail = format!(
        "{RUNS} executions per suite, {} violations; alg3 runs converged {alg3_runs_converged}/{RUNS}; scheduler min p {worst_p:.4}{}",
        failures.len(),
        failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
    );
    outcome(failures.is_empty() && alg3_runs_converged == RUNS, detail)
}

fn calibration() -> Outcome {
    let r = null_calibration(500, CalibrationSizes::default(), &Streams::new(1100)).unwrap();
    outcome(
        r.max_rate() <= 0.002,
        format!(
            "false leaks over {}: first-partner {}, view {}, chi-square {}",
            r.repetitions, r.first_partner, r.view_distribution, r.chi_square
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 private remainder correctness", correctness),
        ("2 convergence scaling exponent", scaling),
        ("3 freshness probability", freshness),
        ("4 unit-transfer protocol leaks", alg1_leaks),
        ("5 private remainder shows no leakage", alg3_private),
        ("6 masked transfer delivery and uniformity", p2p),
        ("7 clock-driven probe accuracy", probe),
        ("8 invariant suites", invariants),
        ("9 null calibration", calibration),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("[{tag}] criterion {name}: {} ({:.1}s)", o.detail, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
