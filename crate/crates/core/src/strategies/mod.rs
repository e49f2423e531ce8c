//! Inference strategies over a generation backend.
//!
//! Five strategies share one outcome shape and one accounting model:
//!
//! * `cot`: a single reasoning path.
//! * `sc`: N parallel reasoning paths, vote.
//! * `ac`: sequential single samples with a frequency stopping rule.
//! * `esc`: sequential windows of parallel samples, stopping when a window
//!   agrees.
//! * `seersc`: a cheap direct-answer probe sizes the reasoning batch by
//!   answer entropy, then one parallel reasoning round.
//!
//! Accounting: samples issued together form a round costing the maximum of
//! their latencies; successive rounds add. Token totals count every
//! generated token, with pruned paths truncated at their prune point.

use serde::{Deserialize, Serialize};

use crate::allocation::{BudgetDecision, ThresholdConfig};
use crate::answer::{Completion, ExtractionRule, GenerationMode};
use crate::error::{Error, Result};
use crate::scoring::EntropyReport;

mod run;
mod vote;

pub use run::{run_ac, run_cot, run_esc, run_sc, run_seersc, run_strategy};
pub use vote::{majority_vote, prune_paths, weighted_vote};

/// The inference strategy to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Cot,
    Sc,
    Ac,
    Esc,
    Seersc,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Strategy::Cot => "cot",
            Strategy::Sc => "sc",
            Strategy::Ac => "ac",
            Strategy::Esc => "esc",
            Strategy::Seersc => "seersc",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cot" => Ok(Strategy::Cot),
            "sc" => Ok(Strategy::Sc),
            "ac" => Ok(Strategy::Ac),
            "esc" => Ok(Strategy::Esc),
            "seersc" => Ok(Strategy::Seersc),
            other => Err(Error::InvalidConfig(format!(
                "unknown strategy {other:?} (expected cot, sc, ac, esc, or seersc)"
            ))),
        }
    }
}

/// How the probe entropy is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMode {
    /// Categories weighted by summed member confidence.
    #[default]
    ConfidenceWeighted,
    /// Plain frequency-based Shannon entropy (ablation baseline).
    Shannon,
}

impl std::fmt::Display for EntropyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EntropyMode::ConfidenceWeighted => write!(f, "confidence_weighted"),
            EntropyMode::Shannon => write!(f, "shannon"),
        }
    }
}

impl std::str::FromStr for EntropyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "confidence_weighted" => Ok(EntropyMode::ConfidenceWeighted),
            "shannon" => Ok(EntropyMode::Shannon),
            other => Err(Error::InvalidConfig(format!(
                "unknown entropy mode {other:?} (expected confidence_weighted or shannon)"
            ))),
        }
    }
}

/// How the final answer is selected from the voting paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteRule {
    #[default]
    Majority,
    /// Paths weigh in with the confidence of their final token window.
    TailWeighted,
}

impl std::fmt::Display for VoteRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VoteRule::Majority => write!(f, "majority"),
            VoteRule::TailWeighted => write!(f, "tail_weighted"),
        }
    }
}

impl std::str::FromStr for VoteRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(VoteRule::Majority),
            "tail_weighted" => Ok(VoteRule::TailWeighted),
            other => Err(Error::InvalidConfig(format!(
                "unknown vote rule {other:?} (expected majority or tail_weighted)"
            ))),
        }
    }
}

/// Min-confidence path pruning settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruningConfig {
    /// Token window over which confidences are evaluated.
    #[serde(default = "default_trace_window")]
    pub window_size: usize,
    /// Paths whose minimum window confidence falls below this are dropped
    /// before the vote. Scale (0, 1], same as answer confidence.
    pub threshold: f64,
}

fn default_trace_window() -> usize {
    128
}

impl PruningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size == 0 {
            return Err(Error::ZeroWindow);
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "pruning threshold {} outside (0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Full parameterization of one strategy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    /// Reasoning-path budget N.
    pub n: usize,
    /// AC stopping threshold on top-answer relative frequency.
    pub ac_threshold: f64,
    /// Samples required before AC may stop.
    pub ac_min_samples: usize,
    /// ESC window size W.
    pub esc_window: usize,
    /// Probe sample count M.
    pub seer_m: usize,
    pub system1_temperature: f64,
    pub system2_temperature: f64,
    pub thresholds: ThresholdConfig,
    pub entropy_mode: EntropyMode,
    pub vote: VoteRule,
    /// Tail window for the weighted vote, in tokens.
    pub vote_tail_window: usize,
    pub pruning: Option<PruningConfig>,
    pub extraction: ExtractionRule,
    pub max_tokens: usize,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            strategy: Strategy::Seersc,
            n: 8,
            ac_threshold: 0.95,
            ac_min_samples: 3,
            esc_window: 5,
            seer_m: 64,
            system1_temperature: 1.0,
            system2_temperature: 1.0,
            thresholds: ThresholdConfig::default(),
            entropy_mode: EntropyMode::default(),
            vote: VoteRule::default(),
            vote_tail_window: 128,
            pruning: None,
            extraction: ExtractionRule::default(),
            max_tokens: 16384,
        }
    }
}

impl StrategyConfig {
    pub fn for_strategy(strategy: Strategy) -> Self {
        StrategyConfig {
            strategy,
            ..StrategyConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if !(self.ac_threshold > 0.0 && self.ac_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ac_threshold {} outside (0, 1]",
                self.ac_threshold
            )));
        }
        if self.ac_min_samples < 2 {
            return Err(Error::InvalidConfig(
                "ac_min_samples must be at least 2".into(),
            ));
        }
        if self.esc_window < 1 {
            return Err(Error::InvalidConfig("esc_window must be at least 1".into()));
        }
        if self.strategy == Strategy::Esc && self.esc_window > self.n {
            return Err(Error::InvalidConfig(format!(
                "esc_window {} exceeds budget n {}",
                self.esc_window, self.n
            )));
        }
        if self.strategy == Strategy::Seersc && self.seer_m < 2 {
            return Err(Error::InvalidConfig("seer_m must be at least 2".into()));
        }
        for (name, t) in [
            ("system1_temperature", self.system1_temperature),
            ("system2_temperature", self.system2_temperature),
        ] {
            if t < 0.0 || !t.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and nonnegative, got {t}"
                )));
            }
        }
        if self.vote_tail_window == 0 {
            return Err(Error::ZeroWindow);
        }
        if self.max_tokens < 1 {
            return Err(Error::InvalidConfig("max_tokens must be at least 1".into()));
        }
        self.thresholds.validate()?;
        if let Some(p) = &self.pruning {
            p.validate()?;
        }
        Ok(())
    }
}

/// Compact record of a generated completion, without raw logprob vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub answer: Option<String>,
    pub token_count: usize,
    pub latency_s: f64,
    pub mode: GenerationMode,
    pub sample_index: usize,
    /// Exponentiated mean token log-likelihood; absent when the backend
    /// supplied no logprobs.
    pub confidence: Option<f64>,
}

impl From<&Completion> for CompletionRecord {
    fn from(c: &Completion) -> Self {
        CompletionRecord {
            answer: c.answer.clone(),
            token_count: c.token_count,
            latency_s: c.latency_s,
            mode: c.mode,
            sample_index: c.sample_index,
            confidence: match &c.token_logprobs {
                Some(lp) if !lp.is_empty() => Some(c.confidence_or_default()),
                _ => None,
            },
        }
    }
}

/// One batch of samples issued together; costs the max of its members'
/// latencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub mode: GenerationMode,
    pub sample_indices: Vec<usize>,
    pub round_latency_s: f64,
}

/// Probe phase trace for a `seersc` outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct System1Trace {
    pub records: Vec<CompletionRecord>,
    /// Absent when no probe answer could be extracted.
    pub report: Option<EntropyReport>,
    pub decision: BudgetDecision,
    /// True when the probe yielded no extractable answers and the budget
    /// fell back to the full tier.
    pub fallback_full: bool,
}

/// A reasoning path dropped by pruning before the vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedPath {
    pub record: CompletionRecord,
    /// Tokens counted up to the end of the first violating window.
    pub counted_tokens: usize,
}

/// Result of running one strategy on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyOutcome {
    pub problem_id: String,
    pub final_answer: Option<String>,
    /// Present only for `seersc`.
    pub system1: Option<System1Trace>,
    /// Reasoning paths that participated in the final answer.
    pub system2: Vec<CompletionRecord>,
    pub pruned: Vec<PrunedPath>,
    /// Every generated token: probe + reasoning, pruned paths truncated at
    /// their prune point.
    pub total_tokens: usize,
    /// Sum over rounds of the max in-round completion latency.
    pub latency_s: f64,
    pub rounds: Vec<RoundRecord>,
    /// True when any completion lacked logprobs and confidences defaulted
    /// to 1.
    pub missing_logprobs: bool,
}
