//! Budget-adaptive self-consistency for reasoning models.
//!
//! The engine probes each problem with a burst of cheap direct-answer
//! samples, scores the answer spread with a confidence-weighted entropy,
//! and sizes the expensive reasoning batch accordingly: confident problems
//! get one path, uncertain ones get the full budget. Fixed-budget and
//! adaptive baselines, answer-confidence extensions, a deterministic
//! simulator, and an OpenAI-compatible HTTP client share the same
//! accounting so latency and token comparisons are apples to apples.

pub mod allocation;
pub mod answer;
pub mod backend;
pub mod error;
pub mod harness;
pub mod scoring;
pub mod strategies;

pub use allocation::{allocate_budget, compute_thresholds, BudgetDecision, BudgetTier, ThresholdConfig, Thresholds};
pub use answer::{
    categorize, extract_answer, normalize_answer, AnswerCategory, Completion, ExtractionRule,
    GenerationMode, Problem,
};
pub use backend::{
    derive_seed, Backend, BackendKind, BackendStatsSnapshot, EndpointConfig, GenerationRequest,
    HttpBackend, SimBackend, SimProblemProfile,
};
pub use error::{Error, Result};
pub use harness::{
    generate_corpus, load_dataset, load_profiles, run_experiment, CorpusSpec, Dataset, RunReport,
};
pub use scoring::{confidence, confidence_trace, weighted_entropy, ConfidenceTrace, EntropyReport};
pub use strategies::{
    majority_vote, prune_paths, run_strategy, weighted_vote, PruningConfig, Strategy,
    StrategyConfig, StrategyOutcome, VoteRule,
};
