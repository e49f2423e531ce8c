//! Experiment execution: strategies × repeats over a dataset, with a
//! bounded worker pool per run.
//!
//! Problems are dispatched to workers through a shared counter and results
//! are reassembled in problem order, so reports are identical at any
//! worker count. Under the simulated backend the whole report is a pure
//! function of (config, dataset, seed).

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::backend::{derive_seed, Backend, BackendKind};
use crate::error::{Error, Result};
use crate::strategies::{run_strategy, Strategy, StrategyConfig, StrategyOutcome};

use super::dataset::Dataset;

/// A problem whose strategy run failed outright (for example, backend
/// exhaustion). Failed problems count as incorrect in the accuracy
/// denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFailure {
    pub problem_id: String,
    pub error: String,
}

/// Aggregated result of one strategy × repeat over a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: StrategyConfig,
    pub dataset: String,
    /// Effective seed for this repeat.
    pub seed: u64,
    pub outcomes: Vec<StrategyOutcome>,
    pub failures: Vec<ProblemFailure>,
    /// Fraction of all problems whose final answer matched gold.
    pub accuracy: f64,
    /// Mean over completed problems of total tokens, in thousands.
    pub mean_tokens_thousands: f64,
    /// Mean over completed problems of accounted latency.
    pub mean_latency_s: f64,
    /// Simulated backends: summed per-problem latency (deterministic).
    /// Live backends: measured wall-clock duration of the run.
    pub wall_time_s: f64,
}

/// Seed for repeat `r` of a run with base seed `seed`: the base itself for
/// the first repeat, a stable derivation for the rest.
pub fn repeat_seed(seed: u64, repeat: usize) -> u64 {
    if repeat == 0 {
        seed
    } else {
        derive_seed(seed, "repeat", repeat as u64)
    }
}

/// Execute every config for `repeats` repeats over the dataset. Reports
/// come back grouped by config, repeats in order.
pub fn run_experiment(
    dataset: &Dataset,
    configs: &[StrategyConfig],
    backend: &dyn Backend,
    seed: u64,
    repeats: usize,
    workers: usize,
) -> Result<Vec<RunReport>> {
    if dataset.problems.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidConfig("workers must be at least 1".into()));
    }
    let mut reports = Vec::with_capacity(configs.len() * repeats);
    for cfg in configs {
        cfg.validate()?;
        for repeat in 0..repeats {
            reports.push(run_once(dataset, cfg, backend, repeat_seed(seed, repeat), workers)?);
        }
    }
    Ok(reports)
}

fn run_once(
    dataset: &Dataset,
    cfg: &StrategyConfig,
    backend: &dyn Backend,
    seed: u64,
    workers: usize,
) -> Result<RunReport> {
    let n = dataset.problems.len();
    let started = Instant::now();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Result<StrategyOutcome>)>> = Mutex::new(Vec::with_capacity(n));
    std::thread::scope(|scope| {
        for _ in 0..workers.min(n) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let outcome = run_strategy(&dataset.problems[i], backend, cfg, seed);
                results.lock().unwrap().push((i, outcome));
            });
        }
    });
    let mut results = results.into_inner().expect("worker panicked");
    results.sort_by_key(|(i, _)| *i);

    let mut outcomes = Vec::with_capacity(n);
    let mut failures = Vec::new();
    let mut correct = 0usize;
    for (i, result) in results {
        let problem = &dataset.problems[i];
        match result {
            Ok(outcome) => {
                if outcome.final_answer.as_deref() == Some(problem.gold_answer.as_str()) {
                    correct += 1;
                }
                outcomes.push(outcome);
            }
            Err(e) => failures.push(ProblemFailure {
                problem_id: problem.id.clone(),
                error: e.to_string(),
            }),
        }
    }

    let completed = outcomes.len().max(1) as f64;
    let total_latency: f64 = outcomes.iter().map(|o| o.latency_s).sum();
    let wall_time_s = match backend.kind() {
        BackendKind::Simulated => total_latency,
        BackendKind::Http => started.elapsed().as_secs_f64(),
    };
    Ok(RunReport {
        config: cfg.clone(),
        dataset: dataset.name.clone(),
        seed,
        accuracy: correct as f64 / n as f64,
        mean_tokens_thousands: outcomes.iter().map(|o| o.total_tokens as f64).sum::<f64>()
            / completed
            / 1000.0,
        mean_latency_s: total_latency / completed,
        wall_time_s,
        outcomes,
        failures,
    })
}

/// One point on a latency-scaling curve: a strategy run at a given budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub strategy: Strategy,
    pub budget: usize,
    pub accuracy: f64,
    pub mean_latency_s: f64,
}

/// Sweep the reasoning budget N for each strategy and collect
/// (accuracy, latency) points. The ESC window shrinks to fit small
/// budgets.
pub fn latency_scaling(
    dataset: &Dataset,
    base: &StrategyConfig,
    strategies: &[Strategy],
    budgets: &[usize],
    backend: &dyn Backend,
    seed: u64,
    workers: usize,
) -> Result<Vec<ScalingPoint>> {
    let mut points = Vec::with_capacity(strategies.len() * budgets.len());
    for &strategy in strategies {
        for &budget in budgets {
            let mut cfg = base.clone();
            cfg.strategy = strategy;
            cfg.n = budget;
            cfg.esc_window = cfg.esc_window.min(budget);
            let report = run_experiment(dataset, &[cfg], backend, seed, 1, workers)?
                .pop()
                .expect("one report per run");
            points.push(ScalingPoint {
                strategy,
                budget,
                accuracy: report.accuracy,
                mean_latency_s: report.mean_latency_s,
            });
        }
    }
    Ok(points)
}
