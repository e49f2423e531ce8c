//! Answer normalization, extraction, and category grouping.
//!
//! Generated text becomes a normalized answer string, and a batch of
//! completions becomes a partition into answer categories. Entropy and
//! voting both operate on these categories. Equivalence is exact string
//! equality after normalization; completions whose answer cannot be
//! extracted belong to no category.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One benchmark item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub prompt: String,
    /// Expected final answer, already in normalized form.
    pub gold_answer: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

/// Generation mode: fast direct answering or full deliberate reasoning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    Direct,
    Reasoning,
}

impl std::fmt::Display for GenerationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GenerationMode::Direct => write!(f, "direct"),
            GenerationMode::Reasoning => write!(f, "reasoning"),
        }
    }
}

/// One sampled generation.
///
/// `token_logprobs` is `None` when the backend could not supply per-token
/// log-probabilities; confidence-based code falls back to 1.0 in that case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    /// Normalized extracted answer, absent if extraction failed.
    pub answer: Option<String>,
    pub token_logprobs: Option<Vec<f64>>,
    pub token_count: usize,
    pub latency_s: f64,
    pub mode: GenerationMode,
    pub sample_index: usize,
}

impl Completion {
    /// Exponentiated mean token log-likelihood, or 1.0 when logprobs are
    /// unavailable or empty (documented degraded-mode fallback).
    pub fn confidence_or_default(&self) -> f64 {
        match &self.token_logprobs {
            Some(lp) if !lp.is_empty() => crate::scoring::confidence(lp).unwrap_or(1.0),
            _ => 1.0,
        }
    }
}

/// A group of completions that extracted to the same normalized answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerCategory {
    pub label: String,
    /// `sample_index` values of the member completions, in appearance order.
    pub members: Vec<usize>,
}

/// How the final answer is located inside completion text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "pattern")]
pub enum ExtractionRule {
    /// Content of the last boxed-answer marker, falling back to the last
    /// non-empty line when no marker exists. The default.
    BoxedOrLastLine,
    /// Last non-empty line of the text.
    LastLine,
    /// Last match of a custom regex; capture group 1 if present, else the
    /// whole match.
    Regex(String),
}

impl Default for ExtractionRule {
    fn default() -> Self {
        ExtractionRule::BoxedOrLastLine
    }
}

impl std::fmt::Display for ExtractionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtractionRule::BoxedOrLastLine => write!(f, "boxed_or_last_line"),
            ExtractionRule::LastLine => write!(f, "last_line"),
            ExtractionRule::Regex(pat) => write!(f, "regex:{pat}"),
        }
    }
}

impl std::str::FromStr for ExtractionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(pat) = s.strip_prefix("regex:") {
            regex::Regex::new(pat)?;
            return Ok(ExtractionRule::Regex(pat.to_string()));
        }
        match s {
            "boxed_or_last_line" => Ok(ExtractionRule::BoxedOrLastLine),
            "last_line" => Ok(ExtractionRule::LastLine),
            other => Err(Error::InvalidConfig(format!(
                "unknown extraction rule {other:?} (expected boxed_or_last_line, last_line, or regex:<pattern>)"
            ))),
        }
    }
}

/// An [`ExtractionRule`] with any custom pattern compiled once.
#[derive(Debug, Clone)]
pub enum Extractor {
    BoxedOrLastLine,
    LastLine,
    Regex(regex::Regex),
}

impl Extractor {
    pub fn new(rule: &ExtractionRule) -> Result<Self> {
        Ok(match rule {
            ExtractionRule::BoxedOrLastLine => Extractor::BoxedOrLastLine,
            ExtractionRule::LastLine => Extractor::LastLine,
            ExtractionRule::Regex(pat) => Extractor::Regex(regex::Regex::new(pat)?),
        })
    }

    pub fn extract(&self, text: &str) -> Option<String> {
        let raw = match self {
            Extractor::BoxedOrLastLine => last_boxed_content(text)
                .map(str::to_owned)
                .or_else(|| last_nonempty_line(text).map(str::to_owned)),
            Extractor::LastLine => last_nonempty_line(text).map(str::to_owned),
            Extractor::Regex(re) => re.find_iter(text).last().map(|m| {
                let caps = re.captures(m.as_str()).expect("match recaptures");
                caps.get(1).unwrap_or(caps.get(0).unwrap()).as_str().to_owned()
            }),
        }?;
        let normalized = normalize_answer(&raw);
        if normalized.is_empty() {
            None
        } else {
            Some(normalized)
        }
    }
}

/// Normalize an answer string: trim, collapse internal whitespace runs to a
/// single space, lowercase, strip trailing periods. Idempotent.
pub fn normalize_answer(raw: &str) -> String {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    let lower = collapsed.to_lowercase();
    lower.trim_end_matches(['.', ' ']).to_string()
}

/// Extract and normalize the final answer from completion text.
///
/// Returns `None` when the rule does not match or the match normalizes to
/// an empty string; unextractable answers are a value, not an error.
pub fn extract_answer(text: &str, rule: &ExtractionRule) -> Result<Option<String>> {
    Ok(Extractor::new(rule)?.extract(text))
}

/// Content of the last `\boxed{...}` marker, balanced over nested braces.
fn last_boxed_content(text: &str) -> Option<&str> {
    const MARKER: &str = "\\boxed{";
    let mut found = None;
    let mut search_from = 0;
    while let Some(pos) = text[search_from..].find(MARKER) {
        let open = search_from + pos + MARKER.len();
        let mut depth = 1usize;
        for (off, ch) in text[open..].char_indices() {
            match ch {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        found = Some(&text[open..open + off]);
                        break;
                    }
                }
                _ => {}
            }
        }
        search_from = open;
    }
    found
}

fn last_nonempty_line(text: &str) -> Option<&str> {
    text.lines().rev().find(|l| !l.trim().is_empty())
}

/// Group completions into answer categories, one per distinct normalized
/// answer, in first-appearance order. Completions with absent answers are
/// excluded.
pub fn categorize(completions: &[Completion]) -> Vec<AnswerCategory> {
    let mut order: Vec<String> = Vec::new();
    let mut members: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for c in completions {
        if let Some(answer) = &c.answer {
            let entry = members.entry(answer.clone()).or_insert_with(|| {
                order.push(answer.clone());
                Vec::new()
            });
            entry.push(c.sample_index);
        }
    }
    order
        .into_iter()
        .map(|label| {
            let members = members.remove(&label).expect("label recorded");
            AnswerCategory { label, members }
        })
        .collect()
}

impl Problem {
    /// Validate the id and the normalized-gold invariant.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidConfig("problem id must be non-empty".into()));
        }
        if self.gold_answer.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "problem {:?} has an empty gold answer",
                self.id
            )));
        }
        if normalize_answer(&self.gold_answer) != self.gold_answer {
            return Err(Error::InvalidConfig(format!(
                "problem {:?}: gold answer {:?} is not in normalized form (expected {:?})",
                self.id,
                self.gold_answer,
                normalize_answer(&self.gold_answer)
            )));
        }
        Ok(())
    }
}
