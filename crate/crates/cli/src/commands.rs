use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use crate::args::{AttackId, Command, Format, ProtocolId};
use crate::config::ExperimentConfig;
use crate::output::{write_csv, write_json};
use crate::{usage, CliResult};
use popsim::engine::{
    parallel_time, run_trials, write_trace_jsonl, Execution, Protocol, RunOptions, Streams,
};
use popsim::privacy_lab::{
    cubic_budget, first_partner_attack, freshness_monte_carlo, freshness_probability,
    p2p_uniformity, random_inputs, view_distribution_report, view_features, AttackConfig,
    AttackReport, Feature, Histogram, Observable, TransferReport,
};
use popsim::protocols::{remainder_oracle, Alg1, Alg3, RemainderParams};
use popsim::subroutines::{
    fixed_length_probe_accuracy, measure_clock_rounds, ClockParams, Label, P2PInput, P2PTransfer,
};
use popsim::Modulus;

// Auxiliary stream labels.
const INPUTS: u64 = 0x1a;

pub fn execute(command: &Command) -> CliResult<()> {
    let cfg = ExperimentConfig::resolve(command)?;
    match command {
        Command::Run(_) => {
            let summary = cmd_run(&cfg)?;
            match cfg.format {
                Format::Json => write_json(&cfg, &summary),
                Format::Csv => write_csv(&cfg, &[summary.csv_row()]),
            }
        }
        Command::Convergence(_) => {
            let result = cmd_convergence(&cfg)?;
            match cfg.format {
                Format::Json => write_json(&cfg, &result),
                Format::Csv => write_csv(&cfg, &result.rows),
            }
        }
        Command::Privacy(_) => match cmd_privacy(&cfg)? {
            PrivacyResult::Attack(report) => match cfg.format {
                Format::Json => write_json(&cfg, &report),
                Format::Csv => write_csv(&cfg, &[report]),
            },
            PrivacyResult::Transfer(report) => write_transfer(&cfg, &report),
            PrivacyResult::Freshness(f) => match cfg.format {
                Format::Json => write_json(&cfg, &f),
                Format::Csv => write_csv(&cfg, &[f]),
            },
        },
        Command::ProbeBench(_) => {
            let result = cmd_probe_bench(&cfg)?;
            match cfg.format {
                Format::Json => write_json(&cfg, &result),
                Format::Csv => write_csv(&cfg, &result.sweep),
            }
        }
        Command::P2pTest(_) => write_transfer(&cfg, &cmd_p2p_test(&cfg)?),
    }
}

fn params(cfg: &ExperimentConfig) -> CliResult<RemainderParams> {
    Ok(RemainderParams::new(cfg.k, cfg.r)?)
}

fn modulus(cfg: &ExperimentConfig) -> CliResult<Modulus> {
    Ok(Modulus::new(cfg.k)?)
}

/// Explicit inputs, or uniform ones drawn from the seed.
fn resolve_inputs(cfg: &ExperimentConfig, streams: &Streams) -> CliResult<Vec<u8>> {
    let k = modulus(cfg)?;
    let values = match &cfg.inputs {
        Some(v) => v.clone(),
        None => (0..cfg.n).map(|_| k.sample(&mut streams.aux(INPUTS))).collect(),
    };
    params(cfg)?.check_inputs(&values)?;
    Ok(values)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub converged: bool,
    pub steps: u64,
    pub parallel_time: f64,
    /// Predicate value (or transferred value), or `"unconverged"`.
    pub output: serde_json::Value,
    pub ground_truth: serde_json::Value,
    pub agree: bool,
    pub inputs: Vec<u8>,
}

#[derive(Serialize)]
pub struct RunCsvRow {
    pub converged: bool,
    pub steps: u64,
    pub parallel_time: f64,
    pub output: String,
    pub ground_truth: String,
    pub agree: bool,
}

impl RunSummary {
    pub fn csv_row(&self) -> RunCsvRow {
        RunCsvRow {
            converged: self.converged,
            steps: self.steps,
            parallel_time: self.parallel_time,
            output: plain(&self.output),
            ground_truth: plain(&self.ground_truth),
            agree: self.agree,
        }
    }
}

fn plain(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn unconverged() -> serde_json::Value {
    serde_json::Value::from("unconverged")
}

fn finish_run<P: Protocol>(
    cfg: &ExperimentConfig,
    mut exec: Execution<'_, P>,
    values: Vec<u8>,
    output: impl Fn(&Execution<'_, P>) -> Option<serde_json::Value>,
    truth: serde_json::Value,
) -> CliResult<RunSummary> {
    let converged = exec.advance(&RunOptions::until_converged(cfg.budget))?;
    if let (Some(path), Some(trace)) = (&cfg.trace, exec.trace()) {
        write_trace_jsonl(trace, BufWriter::new(File::create(path)?))?;
    }
    let out = if converged { output(&exec).unwrap_or_else(unconverged) } else { unconverged() };
    Ok(RunSummary {
        converged,
        steps: exec.steps(),
        parallel_time: parallel_time(exec.steps(), exec.n()),
        agree: out == truth,
        output: out,
        ground_truth: truth,
        inputs: values,
    })
}

pub fn cmd_run(cfg: &ExperimentConfig) -> CliResult<RunSummary> {
    let streams = Streams::new(cfg.seed);
    let values = resolve_inputs(cfg, &streams)?;
    let traced = cfg.trace.is_some();
    match cfg.protocol {
        Some(ProtocolId::Alg1) => {
            let p = params(cfg)?;
            let alg = Alg1::new(p, cfg.p_m1)?;
            let truth = remainder_oracle(&values, &p)?.into();
            let exec = Execution::new(&alg, values.clone(), &streams)?.record_trace(traced);
            finish_run(cfg, exec, values, |e| alg.population_output(e.agents()).map(Into::into), truth)
        }
        Some(ProtocolId::Alg3) => {
            let p = params(cfg)?;
            let alg = Alg3::new(p, ClockParams { m: cfg.m });
            let truth = remainder_oracle(&values, &p)?.into();
            let inputs = Alg3::inputs(&values, cfg.leader)?;
            let exec = Execution::new(&alg, inputs, &streams)?.record_trace(traced);
            finish_run(cfg, exec, values, |e| alg.output(&e.agents()[0]).map(Into::into), truth)
        }
        Some(ProtocolId::P2p) => {
            // Agent 0 sends its input to agent n-1, the only eligible agent.
            let n = values.len();
            let proto = P2PTransfer::new(modulus(cfg)?);
            let inputs = (0..n)
                .map(|j| match j {
                    0 => P2PInput::Sender(values[0]),
                    j if j == n - 1 => P2PInput::Unvisited,
                    _ => P2PInput::Visited,
                })
                .collect();
            let mut exec = Execution::new(&proto, inputs, &streams)?.record_trace(traced);
            let mut delivered = false;
            while exec.steps() < cfg.budget {
                exec.step()?;
                if exec.agents()[n - 1].message.label == Label::Sender {
                    delivered = true;
                    break;
                }
            }
            if let (Some(path), Some(trace)) = (&cfg.trace, exec.trace()) {
                write_trace_jsonl(trace, BufWriter::new(File::create(path)?))?;
            }
            let output = match exec.agents()[n - 1].hidden {
                Some(v) if delivered => v.into(),
                _ => unconverged(),
            };
            let truth = serde_json::Value::from(values[0]);
            Ok(RunSummary {
                converged: delivered,
                steps: exec.steps(),
                parallel_time: parallel_time(exec.steps(), n),
                agree: output == truth,
                output,
                ground_truth: truth,
                inputs: values,
            })
        }
        None => Err(usage("run needs --protocol")),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub trials: u64,
    pub budget: u64,
    pub converged: u64,
    pub correct: u64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub mean: f64,
    /// Some trial did not converge within the budget.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceFit {
    /// Slope of `ln median` against `ln n`.
    pub alpha: f64,
    /// Slope of `ln(median / ln n)` against `ln n`, i.e. the exponent in
    /// `steps ≈ c n^alpha ln n`.
    pub alpha_log_adjusted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceResult {
    pub rows: Vec<ConvergenceRow>,
    pub fit: Option<ConvergenceFit>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Least-squares slope of `ln y` (or `ln(y / ln n)`) against `ln n`.
/// Needs two distinct sizes.
pub fn fit_exponent(points: &[(usize, f64)], log_adjusted: bool) -> Option<f64> {
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|&(n, y)| if log_adjusted { (y / (n as f64).ln()).ln() } else { y.ln() })
        .collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if xs.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

pub fn cmd_convergence(cfg: &ExperimentConfig) -> CliResult<ConvergenceResult> {
    let p = params(cfg)?;
    let alg = Alg3::new(p, ClockParams { m: cfg.m });
    let root = Streams::new(cfg.seed);
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        let budget = if cfg.budget_explicit { cfg.budget } else { cubic_budget(n, 20.0) };
        let leader = if cfg.leader < n { cfg.leader } else { 0 };
        let results = run_trials(&root.trial(n as u64), cfg.trials, |_, s| {
            let values = random_inputs(n, p.k, usize::MAX, 0, &mut s.aux(INPUTS));
            let mut exec = Execution::new(&alg, Alg3::inputs(&values, leader)?, &s)?;
            let done = exec.advance(&RunOptions::until_converged(budget))?;
            let correct = done && Alg3::population_sum(exec.agents()) == Some(p.k.sum(values));
            Ok::<_, popsim::Error>((done, correct, exec.steps()))
        });
        let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        let mut steps: Vec<f64> = results.iter().map(|r| r.2 as f64).collect();
        steps.sort_by(f64::total_cmp);
        let converged = results.iter().filter(|r| r.0).count() as u64;
        rows.push(ConvergenceRow {
            n,
            trials: cfg.trials,
            budget,
            converged,
            correct: results.iter().filter(|r| r.1).count() as u64,
            median: quantile(&steps, 0.5),
            q1: quantile(&steps, 0.25),
            q3: quantile(&steps, 0.75),
            mean: steps.iter().sum::<f64>() / steps.len() as f64,
            flagged: converged < cfg.trials,
        });
    }
    let points: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.median)).collect();
    let fit = fit_exponent(&points, false).zip(fit_exponent(&points, true)).map(
        |(alpha, alpha_log_adjusted)| ConvergenceFit { alpha, alpha_log_adjusted },
    );
    Ok(ConvergenceResult { rows, fit })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreshnessResult {
    pub n: usize,
    pub closed_form: f64,
    pub monte_carlo: f64,
    pub trials: u64,
    pub abs_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PrivacyResult {
    Attack(AttackReport),
    Transfer(TransferReport),
    Freshness(FreshnessResult),
}

fn attack_config(cfg: &ExperimentConfig) -> AttackConfig {
    let mut a = AttackConfig::new(cfg.n, cfg.trials);
    a.adversary = cfg.adversary;
    a.leader = Some(cfg.leader);
    a.budget = Some(cfg.budget);
    a.feature_len = cfg.feature_len;
    a
}

/// Second input vector for the view test: two non-adversary inputs moved
/// by +1 and -1, which keeps the sum.
pub fn shifted_pair(i1: &[u8], adversary: usize, k: Modulus) -> Option<Vec<u8>> {
    let mut others = (0..i1.len()).filter(|&j| j != adversary);
    let (a, b) = (others.next()?, others.next()?);
    let mut i2 = i1.to_vec();
    i2[a] = k.add(i2[a], 1);
    i2[b] = k.sub(i2[b], 1);
    Some(i2)
}

fn view_attack<P: Observable>(
    proto: &P,
    cfg: &ExperimentConfig,
    streams: &Streams,
) -> CliResult<AttackReport> {
    let k = modulus(cfg)?;
    let i1 = resolve_inputs(cfg, streams)?;
    let i2 = match &cfg.inputs2 {
        Some(v) => v.clone(),
        None => shifted_pair(&i1, cfg.adversary, k)
            .ok_or_else(|| usage("view-distribution needs at least three agents"))?,
    };
    let acfg = attack_config(cfg);
    popsim::privacy_lab::check_view_pair(proto, &acfg, &i1, &i2)?;
    let a = view_features(proto, &acfg, &i1, &streams.trial(1))?;
    let b = view_features(proto, &acfg, &i2, &streams.trial(2))?;
    if let Some(dir) = &cfg.histograms {
        fs::create_dir_all(dir)?;
        write_histogram(&Path::new(dir).join("i1.csv"), &a)?;
        write_histogram(&Path::new(dir).join("i2.csv"), &b)?;
    }
    Ok(view_distribution_report(proto, &acfg, &a, &b, streams)?)
}

fn write_histogram(path: &Path, features: &[Feature]) -> CliResult<()> {
    let hist: Histogram<&Feature> = features.iter().collect();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["feature", "count"])?;
    for (feature, count) in hist.iter() {
        w.write_record([feature.to_string(), count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_privacy(cfg: &ExperimentConfig) -> CliResult<PrivacyResult> {
    let streams = Streams::new(cfg.seed);
    let attack = cfg.attack.ok_or_else(|| usage("privacy needs --attack"))?;
    let p = params(cfg)?;
    let alg1 = || Alg1::new(p, cfg.p_m1);
    let alg3 = Alg3::new(p, ClockParams { m: cfg.m });
    Ok(match (attack, cfg.protocol) {
        (AttackId::Freshness, _) => {
            let closed_form = freshness_probability(cfg.n)?;
            let monte_carlo = freshness_monte_carlo(cfg.n, cfg.trials, &streams)?;
            PrivacyResult::Freshness(FreshnessResult {
                n: cfg.n,
                closed_form,
                monte_carlo,
                trials: cfg.trials,
                abs_error: (closed_form - monte_carlo).abs(),
            })
        }
        (AttackId::FirstPartner, Some(ProtocolId::Alg1)) => PrivacyResult::Attack(
            first_partner_attack(&alg1()?, &attack_config(cfg), cfg.adversary_input, &streams)?,
        ),
        (AttackId::FirstPartner, Some(ProtocolId::Alg3)) => PrivacyResult::Attack(
            first_partner_attack(&alg3, &attack_config(cfg), cfg.adversary_input, &streams)?,
        ),
        (AttackId::ViewDistribution, Some(ProtocolId::Alg1)) => {
            PrivacyResult::Attack(view_attack(&alg1()?, cfg, &streams)?)
        }
        (AttackId::ViewDistribution, Some(ProtocolId::Alg3)) => {
            PrivacyResult::Attack(view_attack(&alg3, cfg, &streams)?)
        }
        (AttackId::P2pUniformity, Some(ProtocolId::P2p)) => PrivacyResult::Transfer(transfer(cfg)?),
        (attack, protocol) => {
            return Err(usage(format!("attack {attack:?} does not apply to {protocol:?}")))
        }
    })
}

fn transfer(cfg: &ExperimentConfig) -> CliResult<TransferReport> {
    let k = modulus(cfg)?;
    let secret = cfg.inputs.as_ref().map_or(k.get() - 1, |v| v[0]);
    Ok(p2p_uniformity(k, cfg.n, secret, cfg.trials, &Streams::new(cfg.seed))?)
}

pub fn cmd_p2p_test(cfg: &ExperimentConfig) -> CliResult<TransferReport> {
    transfer(cfg)
}

#[derive(Serialize)]
struct EmittedRow<'a> {
    name: &'a str,
    samples: u64,
    statistic: f64,
    dof: u32,
    p_value: f64,
    delivered: u64,
    trials: u64,
}

fn write_transfer(cfg: &ExperimentConfig, report: &TransferReport) -> CliResult<()> {
    match cfg.format {
        Format::Json => write_json(cfg, report),
        Format::Csv => {
            let rows: Vec<EmittedRow<'_>> = report
                .emitted
                .iter()
                .map(|e| EmittedRow {
                    name: &e.name,
                    samples: e.samples,
                    statistic: e.test.statistic,
                    dof: e.test.dof,
                    p_value: e.test.p_value,
                    delivered: report.delivered,
                    trials: report.trials,
                })
                .collect();
            write_csv(cfg, &rows)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub d: f64,
    pub rounds: u64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClockSummary {
    pub m: u8,
    pub rounds: u64,
    pub accuracy: f64,
    pub marked_accuracy: f64,
    pub unmarked_accuracy: f64,
    pub mean_length: f64,
    /// Mean round length in units of `n ln n`.
    pub mean_length_per_n_ln_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeBenchResult {
    pub sweep: Vec<SweepRow>,
    pub clock: ClockSummary,
}

/// Clock-driven probe: `rounds / 2` rounds with one satisfying agent and as
/// many without.
pub fn clock_summary(n: usize, m: u8, rounds: u64, streams: &Streams) -> CliResult<ClockSummary> {
    let half = (rounds / 2).max(1) as usize;
    let params = ClockParams { m };
    let marked = measure_clock_rounds(n, params, true, half, &streams.trial(1))?;
    let unmarked = measure_clock_rounds(n, params, false, half, &streams.trial(2))?;
    let rate = |rs: &[popsim::subroutines::ClockRound]| {
        rs.iter().filter(|r| r.outcome.matches(r.truth)).count() as f64 / rs.len() as f64
    };
    let all: Vec<_> = marked.iter().chain(&unmarked).copied().collect();
    let mean_length = all.iter().map(|r| r.length as f64).sum::<f64>() / all.len() as f64;
    let nf = n as f64;
    Ok(ClockSummary {
        m,
        rounds: all.len() as u64,
        accuracy: rate(&all),
        marked_accuracy: rate(&marked),
        unmarked_accuracy: rate(&unmarked),
        mean_length,
        mean_length_per_n_ln_n: mean_length / (nf * nf.ln()),
    })
}

pub fn cmd_probe_bench(cfg: &ExperimentConfig) -> CliResult<ProbeBenchResult> {
    let streams = Streams::new(cfg.seed);
    let rounds = cfg.trials as usize;
    let mut sweep = Vec::new();
    for (i, &d) in cfg.d.iter().enumerate() {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(usage(format!("invalid round factor {d}")));
        }
        let accuracy = fixed_length_probe_accuracy(cfg.n, d, rounds, &streams.trial(100 + i as u64))?;
        sweep.push(SweepRow { d, rounds: cfg.trials, accuracy });
    }
    let clock = clock_summary(cfg.n, cfg.m, cfg.trials, &streams)?;
    Ok(ProbeBenchResult { sweep, clock })
}
