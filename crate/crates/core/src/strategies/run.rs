//! Strategy runners.
//!
//! Each runner is a deterministic function of (problem, backend, config,
//! seed). Runners issue one or more generation rounds, extract and
//! normalize answers, apply the configured vote, and assemble a
//! [`StrategyOutcome`] under the shared accounting rules.

use crate::allocation::{allocate_budget, compute_thresholds};
use crate::answer::{categorize, Completion, Extractor, GenerationMode, Problem};
use crate::backend::{Backend, GenerationRequest};
use crate::error::Result;
use crate::scoring::{shannon_entropy, weighted_entropy, EntropyReport};

use super::{
    majority_vote, prune_paths, weighted_vote, CompletionRecord, PrunedPath, RoundRecord,
    Strategy, StrategyConfig, StrategyOutcome, System1Trace, VoteRule,
};

/// Dispatch to the runner named by `cfg.strategy`.
pub fn run_strategy(
    problem: &Problem,
    backend: &dyn Backend,
    cfg: &StrategyConfig,
    base_seed: u64,
) -> Result<StrategyOutcome> {
    match cfg.strategy {
        Strategy::Cot => run_cot(problem, backend, cfg, base_seed),
        Strategy::Sc => run_sc(problem, backend, cfg, base_seed),
        Strategy::Ac => run_ac(problem, backend, cfg, base_seed),
        Strategy::Esc => run_esc(problem, backend, cfg, base_seed),
        Strategy::Seersc => run_seersc(problem, backend, cfg, base_seed),
    }
}

struct Runner<'a> {
    problem: &'a Problem,
    backend: &'a dyn Backend,
    cfg: &'a StrategyConfig,
    base_seed: u64,
    extractor: Extractor,
}

impl<'a> Runner<'a> {
    fn new(
        problem: &'a Problem,
        backend: &'a dyn Backend,
        cfg: &'a StrategyConfig,
        base_seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        problem.validate()?;
        Ok(Runner {
            problem,
            backend,
            cfg,
            base_seed,
            extractor: Extractor::new(&cfg.extraction)?,
        })
    }

    /// Issue one parallel round of `n` samples and extract their answers.
    /// Completions are ordered by sample index so downstream logic is
    /// independent of arrival order.
    fn draw(
        &self,
        mode: GenerationMode,
        n: usize,
        temperature: f64,
        first_sample_index: usize,
    ) -> Result<(Vec<Completion>, RoundRecord)> {
        let request = GenerationRequest {
            problem_id: self.problem.id.clone(),
            prompt: self.problem.prompt.clone(),
            mode,
            n,
            temperature,
            max_tokens: self.cfg.max_tokens,
            base_seed: self.base_seed,
            first_sample_index,
        };
        let mut completions = self.backend.generate(&request)?;
        completions.sort_by_key(|c| c.sample_index);
        for c in &mut completions {
            c.answer = self.extractor.extract(&c.text);
        }
        let round = RoundRecord {
            mode,
            sample_indices: completions.iter().map(|c| c.sample_index).collect(),
            round_latency_s: completions.iter().map(|c| c.latency_s).fold(0.0, f64::max),
        };
        Ok((completions, round))
    }

    /// Apply pruning (when configured) and the configured vote rule.
    ///
    /// When pruning would drop every path it is skipped entirely for this
    /// problem: the vote runs over all paths at full token cost.
    fn decide(&self, completions: &[Completion]) -> Result<Decision> {
        let (kept_idx, pruned_idx) = match &self.cfg.pruning {
            Some(p) => {
                let (kept, pruned) = prune_paths(completions, p.window_size, p.threshold)?;
                if kept.is_empty() {
                    ((0..completions.len()).collect(), Vec::new())
                } else {
                    (kept, pruned)
                }
            }
            None => ((0..completions.len()).collect::<Vec<_>>(), Vec::new()),
        };

        let kept: Vec<&Completion> = kept_idx.iter().map(|&i| &completions[i]).collect();
        let final_answer = match self.cfg.vote {
            VoteRule::Majority => {
                let answers: Vec<&str> = kept.iter().filter_map(|c| c.answer.as_deref()).collect();
                majority_vote(&answers)
            }
            VoteRule::TailWeighted => {
                let owned: Vec<Completion> = kept.iter().map(|&c| c.clone()).collect();
                weighted_vote(&owned, self.cfg.vote_tail_window)?
            }
        };

        Ok(Decision {
            final_answer,
            system2: kept.iter().map(|&c| CompletionRecord::from(c)).collect(),
            kept_tokens: kept.iter().map(|c| c.token_count).sum(),
            pruned: pruned_idx
                .iter()
                .map(|&(i, counted)| PrunedPath {
                    record: CompletionRecord::from(&completions[i]),
                    counted_tokens: counted,
                })
                .collect(),
        })
    }
}

struct Decision {
    final_answer: Option<String>,
    system2: Vec<CompletionRecord>,
    kept_tokens: usize,
    pruned: Vec<PrunedPath>,
}

impl Decision {
    fn pruned_tokens(&self) -> usize {
        self.pruned.iter().map(|p| p.counted_tokens).sum()
    }
}

fn missing_logprobs(completions: &[Completion]) -> bool {
    completions
        .iter()
        .any(|c| c.token_logprobs.as_ref().map_or(true, Vec::is_empty))
}

/// A single reasoning path; its answer is final.
pub fn run_cot(
    problem: &Problem,
    backend: &dyn Backend,
    cfg: &StrategyConfig,
    base_seed: u64,
) -> Result<StrategyOutcome> {
    let r = Runner::new(problem, backend, cfg, base_seed)?;
    let (completions, round) = r.draw(GenerationMode::Reasoning, 1, cfg.system2_temperature, 0)?;
    let c = &completions[0];
    Ok(StrategyOutcome {
        problem_id: problem.id.clone(),
        final_answer: c.answer.clone(),
        system1: None,
        system2: vec![CompletionRecord::from(c)],
        pruned: Vec::new(),
        total_tokens: c.token_count,
        latency_s: round.round_latency_s,
        rounds: vec![round],
        missing_logprobs: missing_logprobs(&completions),
    })
}

/// N parallel reasoning paths, one round, vote.
pub fn run_sc(
    problem: &Problem,
    backend: &dyn Backend,
    cfg: &StrategyConfig,
    base_seed: u64,
) -> Result<StrategyOutcome> {
    let r = Runner::new(problem, backend, cfg, base_seed)?;
    let (completions, round) = r.draw(GenerationMode::Reasoning, cfg.n, cfg.system2_temperature, 0)?;
    let decision = r.decide(&completions)?;
    let total_tokens = decision.kept_tokens + decision.pruned_tokens();
    Ok(StrategyOutcome {
        problem_id: problem.id.clone(),
        final_answer: decision.final_answer,
        system1: None,
        total_tokens,
        latency_s: round.round_latency_s,
        rounds: vec![round],
        missing_logprobs: missing_logprobs(&completions),
        system2: decision.system2,
        pruned: decision.pruned,
    })
}

/// Sequential single samples; stop once the top answer's relative
/// frequency reaches the threshold (with at least `ac_min_samples` drawn)
/// or the budget is exhausted. Votes over everything drawn.
pub fn run_ac(
    problem: &Problem,
    backend: &dyn Backend,
    cfg: &StrategyConfig,
    base_seed: u64,
) -> Result<StrategyOutcome> {
    let r = Runner::new(problem, backend, cfg, base_seed)?;
    let mut completions: Vec<Completion> = Vec::new();
    let mut rounds = Vec::new();
    for i in 0..cfg.n {
        let (batch, round) = r.draw(GenerationMode::Reasoning, 1, cfg.system2_temperature, i)?;
        completions.extend(batch);
        rounds.push(round);
        if completions.len() >= cfg.ac_min_samples && top_frequency(&completions) >= cfg.ac_threshold {
            break;
        }
    }
    finish_sequential(problem, completions, rounds)
}

/// Top answer count over all drawn samples, including unextractable ones
/// in the denominator.
fn top_frequency(completions: &[Completion]) -> f64 {
    let answers: Vec<&str> = completions.iter().filter_map(|c| c.answer.as_deref()).collect();
    let mut counts = std::collections::HashMap::new();
    for a in &answers {
        *counts.entry(*a).or_insert(0usize) += 1;
    }
    counts.values().copied().max().unwrap_or(0) as f64 / completions.len() as f64
}

/// Windows of parallel samples; stop when the most recent `esc_window`
/// answers all agree or the budget is exhausted. The final round shrinks
/// to whatever budget remains. Votes over everything drawn.
pub fn run_esc(
    problem: &Problem,
    backend: &dyn Backend,
    cfg: &StrategyConfig,
    base_seed: u64,
) -> Result<StrategyOutcome> {
    let r = Runner::new(problem, backend, cfg, base_seed)?;
    let mut completions: Vec<Completion> = Vec::new();
    let mut rounds = Vec::new();
    while completions.len() < cfg.n {
        let w = cfg.esc_window.min(cfg.n - completions.len());
        let (batch, round) = r.draw(
            GenerationMode::Reasoning,
            w,
            cfg.system2_temperature,
            completions.len(),
        )?;
        completions.extend(batch);
        rounds.push(round);
        if completions.len() >= cfg.esc_window && window_converged(&completions, cfg.esc_window) {
            break;
        }
    }
    finish_sequential(problem, completions, rounds)
}

/// True when the last `w` answers all extracted and are identical.
fn window_converged(completions: &[Completion], w: usize) -> bool {
    let window = &completions[completions.len() - w..];
    match window[0].answer.as_deref() {
        None => false,
        Some(first) => window.iter().all(|c| c.answer.as_deref() == Some(first)),
    }
}

/// Shared tail for the sequential baselines: majority over all drawn
/// samples, sum-of-rounds latency, no pruning.
fn finish_sequential(
    problem: &Problem,
    completions: Vec<Completion>,
    rounds: Vec<RoundRecord>,
) -> Result<StrategyOutcome> {
    let answers: Vec<&str> = completions.iter().filter_map(|c| c.answer.as_deref()).collect();
    Ok(StrategyOutcome {
        problem_id: problem.id.clone(),
        final_answer: majority_vote(&answers),
        system1: None,
        system2: completions.iter().map(CompletionRecord::from).collect(),
        pruned: Vec::new(),
        total_tokens: completions.iter().map(|c| c.token_count).sum(),
        latency_s: rounds.iter().map(|r| r.round_latency_s).sum(),
        rounds,
        missing_logprobs: missing_logprobs(&completions),
    })
}

/// Probe-then-reason: a parallel direct-answer round estimates answer
/// entropy, the entropy picks the reasoning budget, and one parallel
/// reasoning round decides the answer.
///
/// When no probe answer extracts, the budget falls back to the full tier
/// (maximal-uncertainty reading) and the outcome records the fallback.
/// Probe completions never participate in the final vote.
pub fn run_seersc(
    problem: &Problem,
    backend: &dyn Backend,
    cfg: &StrategyConfig,
    base_seed: u64,
) -> Result<StrategyOutcome> {
    let r = Runner::new(problem, backend, cfg, base_seed)?;
    let thresholds = compute_thresholds(cfg.seer_m, &cfg.thresholds)?;

    let (probe, probe_round) =
        r.draw(GenerationMode::Direct, cfg.seer_m, cfg.system1_temperature, 0)?;
    let categories = categorize(&probe);
    let (report, entropy_nats, fallback_full) = if categories.is_empty() {
        (None, (cfg.seer_m as f64).ln(), true)
    } else {
        let report = match cfg.entropy_mode {
            super::EntropyMode::ConfidenceWeighted => {
                weighted_entropy(&problem.id, &probe, &categories)?
            }
            super::EntropyMode::Shannon => {
                let total = categories.iter().map(|c| c.members.len()).sum();
                let entropy = shannon_entropy(&categories, total)?;
                let category_weights: std::collections::BTreeMap<String, f64> = categories
                    .iter()
                    .map(|c| (c.label.clone(), c.members.len() as f64))
                    .collect();
                let normalized_weights = category_weights
                    .iter()
                    .map(|(l, w)| (l.clone(), w / total as f64))
                    .collect();
                EntropyReport {
                    problem_id: problem.id.clone(),
                    m: categories.len(),
                    sampled: probe.len(),
                    category_weights,
                    normalized_weights,
                    entropy_nats: entropy,
                }
            }
        };
        let entropy = report.entropy_nats;
        (Some(report), entropy, false)
    };
    let budget = allocate_budget(&problem.id, entropy_nats, cfg.n, &thresholds)?;

    let (paths, reasoning_round) = r.draw(
        GenerationMode::Reasoning,
        budget.samples,
        cfg.system2_temperature,
        0,
    )?;
    let decision = if budget.samples == 1 {
        Decision {
            final_answer: paths[0].answer.clone(),
            system2: vec![CompletionRecord::from(&paths[0])],
            kept_tokens: paths[0].token_count,
            pruned: Vec::new(),
        }
    } else {
        r.decide(&paths)?
    };

    let probe_tokens: usize = probe.iter().map(|c| c.token_count).sum();
    let any_missing = missing_logprobs(&probe) || missing_logprobs(&paths);
    let total_tokens = probe_tokens + decision.kept_tokens + decision.pruned_tokens();
    Ok(StrategyOutcome {
        problem_id: problem.id.clone(),
        final_answer: decision.final_answer,
        system1: Some(System1Trace {
            records: probe.iter().map(CompletionRecord::from).collect(),
            report,
            decision: budget,
            fallback_full,
        }),
        total_tokens,
        latency_s: probe_round.round_latency_s + reasoning_round.round_latency_s,
        rounds: vec![probe_round, reasoning_round],
        missing_logprobs: any_missing,
        system2: decision.system2,
        pruned: decision.pruned,
    })
}
