//! Confidence and answer-entropy scoring.
//!
//! An answer's confidence is the exponentiated mean of its token
//! log-likelihoods. A sample set's entropy is computed over answer
//! categories, with each category weighted by the summed confidence of its
//! members and the weights normalized into a distribution. The unweighted
//! Shannon variant over raw category frequencies is kept as an ablation
//! baseline. Window-level confidence traces feed the tail-weighted vote and
//! path pruning extensions.
//!
//! All entropies are in nats. Downstream budget decisions are invariant to
//! the log base because thresholds rescale by the same factor.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::answer::{AnswerCategory, Completion};
use crate::error::{Error, Result};

/// Entropy probe outcome for one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub problem_id: String,
    /// Number of distinct answer categories.
    pub m: usize,
    /// Number of samples the probe drew.
    pub sampled: usize,
    /// Unnormalized category weights, label -> summed member confidence.
    pub category_weights: BTreeMap<String, f64>,
    /// Category weights normalized into a distribution.
    pub normalized_weights: BTreeMap<String, f64>,
    pub entropy_nats: f64,
}

/// Per-window confidence statistics along a single path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceTrace {
    pub window_size: usize,
    /// exp(mean log p) per consecutive token window; final window may be
    /// shorter.
    pub window_scores: Vec<f64>,
    /// Last window's score.
    pub tail_score: f64,
    /// Minimum window score along the path.
    pub min_score: f64,
}

/// Exponentiated mean token log-likelihood, computed in log space.
pub fn confidence(token_logprobs: &[f64]) -> Result<f64> {
    if token_logprobs.is_empty() {
        return Err(Error::EmptyLogprobs);
    }
    let mean = token_logprobs.iter().sum::<f64>() / token_logprobs.len() as f64;
    Ok(mean.exp())
}

/// Confidence-weighted entropy over answer categories.
///
/// Category weights are summed member confidences, normalized into a
/// distribution; the entropy uses the natural log with `0 ln 0 := 0`.
/// Completions lacking logprobs contribute confidence 1.0.
pub fn weighted_entropy(
    problem_id: &str,
    completions: &[Completion],
    categories: &[AnswerCategory],
) -> Result<EntropyReport> {
    if categories.is_empty() {
        return Err(Error::NoExtractableAnswers);
    }
    let by_index: BTreeMap<usize, &Completion> =
        completions.iter().map(|c| (c.sample_index, c)).collect();

    let mut category_weights = BTreeMap::new();
    for cat in categories {
        let mut weight = 0.0;
        for idx in &cat.members {
            let c = by_index
                .get(idx)
                .ok_or_else(|| Error::UnknownProblem(format!("sample index {idx}")))?;
            weight += c.confidence_or_default();
        }
        category_weights.insert(cat.label.clone(), weight);
    }

    let total: f64 = category_weights.values().sum();
    let normalized_weights: BTreeMap<String, f64> = category_weights
        .iter()
        .map(|(label, w)| (label.clone(), w / total))
        .collect();
    let entropy_nats = entropy_of(normalized_weights.values().copied());

    Ok(EntropyReport {
        problem_id: problem_id.to_string(),
        m: categories.len(),
        sampled: completions.len(),
        category_weights,
        normalized_weights,
        entropy_nats,
    })
}

/// Plain Shannon entropy over unweighted category frequencies.
pub fn shannon_entropy(categories: &[AnswerCategory], total: usize) -> Result<f64> {
    if total == 0 {
        return Err(Error::ZeroTotal);
    }
    let counted: usize = categories.iter().map(|c| c.members.len()).sum();
    if counted != total {
        return Err(Error::CountMismatch {
            got: counted,
            expected: total,
        });
    }
    Ok(entropy_of(
        categories
            .iter()
            .map(|c| c.members.len() as f64 / total as f64),
    ))
}

fn entropy_of(probs: impl Iterator<Item = f64>) -> f64 {
    let e: f64 = probs.filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum();
    e.max(0.0)
}

/// Window-level confidence statistics for one token sequence.
///
/// The sequence is split into consecutive windows of `window_size` tokens
/// (the final window may be shorter); each window's score is the
/// exponentiated mean log-likelihood within it.
pub fn confidence_trace(token_logprobs: &[f64], window_size: usize) -> Result<ConfidenceTrace> {
    if token_logprobs.is_empty() {
        return Err(Error::EmptyLogprobs);
    }
    if window_size == 0 {
        return Err(Error::ZeroWindow);
    }
    let window_scores: Vec<f64> = token_logprobs
        .chunks(window_size)
        .map(|w| (w.iter().sum::<f64>() / w.len() as f64).exp())
        .collect();
    let tail_score = *window_scores.last().expect("nonempty input");
    let min_score = window_scores.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConfidenceTrace {
        window_size,
        window_scores,
        tail_score,
        min_score,
    })
}
