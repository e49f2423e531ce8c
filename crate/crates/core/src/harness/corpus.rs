//! Synthetic benchmark corpus generation.
//!
//! Builds a mixed-difficulty problem set with matching simulation
//! profiles. Easy problems concentrate their direct-answer distribution on
//! one label, so a cheap probe suffices; hard problems scatter direct
//! answers over several labels and reward extra reasoning paths. The
//! construction is purely parametric: identical specs yield identical
//! corpora, with all sampling randomness deferred to the backend.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::answer::Problem;
use crate::backend::SimProblemProfile;
use crate::error::{Error, Result};

/// Parameters for one synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub name: String,
    pub problems: usize,
    /// Fraction of problems that are easy, interleaved evenly.
    pub easy_fraction: f64,
    pub tokens_per_second: f64,
    pub direct_token_range: (usize, usize),
    pub reasoning_token_range: (usize, usize),
    /// Probability mass on the single dominant direct label of an easy
    /// problem.
    pub easy_direct_concentration: f64,
    /// Probability of the gold answer under easy reasoning.
    pub easy_reasoning_gold: f64,
    /// Direct-mode gold mass for hard problems; the remainder spreads
    /// uniformly over the wrong labels.
    pub hard_direct_gold: f64,
    /// Distinct direct-mode labels (gold included) for hard problems.
    pub hard_direct_labels: usize,
    /// Probability of the gold answer under hard reasoning.
    pub hard_reasoning_gold: f64,
    /// Distinct reasoning-mode labels (gold included) for hard problems.
    pub hard_reasoning_labels: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            name: "synthetic".into(),
            problems: 500,
            easy_fraction: 0.7,
            tokens_per_second: 100.0,
            direct_token_range: (8, 32),
            reasoning_token_range: (2000, 4000),
            easy_direct_concentration: 0.96,
            easy_reasoning_gold: 0.995,
            hard_direct_gold: 0.45,
            hard_direct_labels: 8,
            hard_reasoning_gold: 0.45,
            hard_reasoning_labels: 6,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Error::InvalidConfig(format!("corpus spec: {m}"));
        if self.problems == 0 {
            return Err(bad("problems must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.easy_fraction) {
            return Err(bad(format!("easy_fraction {} outside [0, 1]", self.easy_fraction)));
        }
        if !(self.tokens_per_second > 0.0) {
            return Err(bad("tokens_per_second must be positive".into()));
        }
        for (name, p) in [
            ("easy_direct_concentration", self.easy_direct_concentration),
            ("easy_reasoning_gold", self.easy_reasoning_gold),
            ("hard_direct_gold", self.hard_direct_gold),
            ("hard_reasoning_gold", self.hard_reasoning_gold),
        ] {
            if !(p > 0.0 && p < 1.0) {
                return Err(bad(format!("{name} {p} outside (0, 1)")));
            }
        }
        if self.hard_direct_labels < 2 || self.hard_reasoning_labels < 2 {
            return Err(bad("hard label counts must be at least 2".into()));
        }
        for (name, (lo, hi)) in [
            ("direct_token_range", self.direct_token_range),
            ("reasoning_token_range", self.reasoning_token_range),
        ] {
            if lo < 1 || hi < lo {
                return Err(bad(format!("{name} ({lo}, {hi}) is empty or starts below 1")));
            }
        }
        Ok(())
    }
}

/// Gold mass plus the remainder spread uniformly over `labels - 1` wrong
/// answers, all exactly summing to 1.
fn spread(gold_label: &str, gold_mass: f64, labels: usize) -> BTreeMap<String, f64> {
    let mut dist = BTreeMap::new();
    dist.insert(gold_label.to_string(), gold_mass);
    let wrongs = labels - 1;
    for w in 0..wrongs {
        // Assign the exact remainder to the last label so the sum is 1
        // within strict tolerance.
        let share = (1.0 - gold_mass) / wrongs as f64;
        let mass = if w == wrongs - 1 {
            1.0 - gold_mass - share * (wrongs - 1) as f64
        } else {
            share
        };
        dist.insert(format!("w{w}"), mass);
    }
    dist
}

/// Build the corpus: problems and their simulation profiles, in id order.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<(Vec<Problem>, Vec<SimProblemProfile>)> {
    spec.validate()?;
    let mut problems = Vec::with_capacity(spec.problems);
    let mut profiles = Vec::with_capacity(spec.problems);
    let mut easy_emitted = 0usize;
    for i in 0..spec.problems {
        // Accumulator interleaving: any prefix holds close to the target
        // easy fraction.
        let easy = ((i + 1) as f64 * spec.easy_fraction).floor() as usize > easy_emitted;
        if easy {
            easy_emitted += 1;
        }
        let id = format!("p{i:04}");
        let gold = "g".to_string();
        let (direct_dist, reasoning_dist) = if easy {
            (
                spread(&gold, spec.easy_direct_concentration, 2),
                spread(&gold, spec.easy_reasoning_gold, 2),
            )
        } else {
            (
                spread(&gold, spec.hard_direct_gold, spec.hard_direct_labels),
                spread(&gold, spec.hard_reasoning_gold, spec.hard_reasoning_labels),
            )
        };
        problems.push(Problem {
            id: id.clone(),
            prompt: format!("Synthetic problem {i}: state the final answer."),
            gold_answer: gold.clone(),
            metadata: [(
                "difficulty".to_string(),
                if easy { "easy" } else { "hard" }.to_string(),
            )]
            .into(),
        });
        profiles.push(SimProblemProfile {
            problem_id: id,
            direct_dist,
            reasoning_dist,
            gold,
            direct_token_range: spec.direct_token_range,
            reasoning_token_range: spec.reasoning_token_range,
            tokens_per_second: spec.tokens_per_second,
            temperature_sharpness: 1.0,
            reference_temperature: 1.0,
        });
    }
    Ok((problems, profiles))
}
