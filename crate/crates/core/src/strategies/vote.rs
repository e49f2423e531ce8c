//! Vote primitives: plain majority, tail-confidence weighting, and
//! min-confidence path pruning.

use std::collections::HashMap;

use crate::answer::Completion;
use crate::error::{Error, Result};
use crate::scoring::confidence_trace;

/// Most frequent answer, ties broken by earliest first appearance. Empty
/// input yields `None`.
pub fn majority_vote<S: AsRef<str>>(answers: &[S]) -> Option<String> {
    let mut order: Vec<&str> = Vec::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for a in answers {
        let a = a.as_ref();
        if !counts.contains_key(a) {
            order.push(a);
        }
        *counts.entry(a).or_insert(0) += 1;
    }
    // Strictly-greater replacement keeps the earliest answer on ties.
    let mut best: Option<(&str, usize)> = None;
    for a in &order {
        let count = counts[a];
        if best.map_or(true, |(_, b)| count > b) {
            best = Some((a, count));
        }
    }
    best.map(|(a, _)| a.to_string())
}

/// Answer with the largest summed tail-window confidence, ties broken by
/// earliest first appearance.
///
/// Each voting completion weighs in with the confidence score of its final
/// token window. Completions without logprobs get weight 1; completions
/// without an extracted answer do not vote.
pub fn weighted_vote(completions: &[Completion], window_size: usize) -> Result<Option<String>> {
    if window_size == 0 {
        return Err(Error::ZeroWindow);
    }
    let mut order: Vec<&str> = Vec::new();
    let mut weights: HashMap<&str, f64> = HashMap::new();
    for c in completions {
        let Some(answer) = c.answer.as_deref() else {
            continue;
        };
        let weight = match &c.token_logprobs {
            Some(lp) if !lp.is_empty() => confidence_trace(lp, window_size)?.tail_score,
            _ => 1.0,
        };
        if !weights.contains_key(answer) {
            order.push(answer);
        }
        *weights.entry(answer).or_insert(0.0) += weight;
    }
    let mut best: Option<(&str, f64)> = None;
    for a in &order {
        let w = weights[a];
        if best.map_or(true, |(_, bw)| w > bw) {
            best = Some((a, w));
        }
    }
    Ok(best.map(|(a, _)| a.to_string()))
}

/// Split completions into kept and pruned sets by minimum window
/// confidence.
///
/// A completion is pruned iff the minimum score over its confidence trace
/// falls strictly below `threshold`. Returns `(kept, pruned)` as indices
/// into the input; each pruned entry carries the token count up to the end
/// of its first violating window, modelling the savings of stopping a bad
/// path early. Completions without logprobs cannot be scored and are kept.
pub fn prune_paths(
    completions: &[Completion],
    window_size: usize,
    threshold: f64,
) -> Result<(Vec<usize>, Vec<(usize, usize)>)> {
    if window_size == 0 {
        return Err(Error::ZeroWindow);
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidConfig(format!(
            "pruning threshold {threshold} outside [0, 1]"
        )));
    }
    let mut kept = Vec::new();
    let mut pruned = Vec::new();
    for (i, c) in completions.iter().enumerate() {
        let Some(lp) = c.token_logprobs.as_ref().filter(|lp| !lp.is_empty()) else {
            kept.push(i);
            continue;
        };
        let trace = confidence_trace(lp, window_size)?;
        if trace.min_score < threshold {
            let violating = trace
                .window_scores
                .iter()
                .position(|&s| s < threshold)
                .expect("min below threshold implies a violating window");
            let counted = ((violating + 1) * window_size).min(c.token_count);
            pruned.push((i, counted));
        } else {
            kept.push(i);
        }
    }
    Ok((kept, pruned))
}
