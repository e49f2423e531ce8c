//! Deterministic simulated generation backend.
//!
//! Each problem carries a profile: an answer distribution per mode at a
//! reference temperature, token-count ranges, and a decode rate. Sampling
//! at another temperature reshapes the distribution with a power transform
//! so that low temperatures collapse toward the mode and high temperatures
//! flatten it. Token log-probabilities are synthesized so that a sample's
//! confidence tracks its category's reshaped probability.
//!
//! All randomness comes from a counter-based generator keyed by
//! `(base_seed, problem_id, mode, sample_index)`: identical requests yield
//! bit-identical completions regardless of scheduling or concurrency.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::answer::{Completion, GenerationMode};
use crate::error::{Error, Result};

use super::{sample_seed, Backend, BackendKind, BackendStats, BackendStatsSnapshot, GenerationRequest};

fn default_one() -> f64 {
    1.0
}

/// Simulation profile for one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimProblemProfile {
    pub problem_id: String,
    /// Answer distribution under fast direct generation, at the reference
    /// temperature.
    pub direct_dist: BTreeMap<String, f64>,
    /// Answer distribution under full reasoning, at the reference
    /// temperature.
    pub reasoning_dist: BTreeMap<String, f64>,
    pub gold: String,
    pub direct_token_range: (usize, usize),
    pub reasoning_token_range: (usize, usize),
    pub tokens_per_second: f64,
    /// Exponent scaling how strongly temperature deviation reshapes the
    /// distribution logits.
    #[serde(default = "default_one")]
    pub temperature_sharpness: f64,
    /// Temperature at which the stored distributions hold.
    #[serde(default = "default_one")]
    pub reference_temperature: f64,
}

impl SimProblemProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Error::BadProfile {
            id: self.problem_id.clone(),
            message,
        };
        for (name, dist) in [("direct_dist", &self.direct_dist), ("reasoning_dist", &self.reasoning_dist)] {
            if dist.is_empty() {
                return Err(bad(format!("{name} is empty")));
            }
            let mut total = 0.0;
            for (label, p) in dist {
                if *p < 0.0 || !p.is_finite() {
                    return Err(bad(format!("{name}[{label:?}] = {p} is not a probability")));
                }
                if crate::answer::normalize_answer(label) != *label {
                    return Err(bad(format!("{name} label {label:?} is not normalized")));
                }
                total += p;
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(bad(format!("{name} sums to {total}, expected 1")));
            }
        }
        for (name, (lo, hi)) in [
            ("direct_token_range", self.direct_token_range),
            ("reasoning_token_range", self.reasoning_token_range),
        ] {
            if lo < 1 || hi < lo {
                return Err(bad(format!("{name} ({lo}, {hi}) is empty or starts below 1")));
            }
        }
        if !(self.tokens_per_second > 0.0) {
            return Err(bad(format!("tokens_per_second {} must be positive", self.tokens_per_second)));
        }
        if !(self.temperature_sharpness > 0.0) {
            return Err(bad("temperature_sharpness must be positive".into()));
        }
        if !(self.reference_temperature > 0.0) {
            return Err(bad("reference_temperature must be positive".into()));
        }
        if crate::answer::normalize_answer(&self.gold) != self.gold {
            return Err(bad(format!("gold {:?} is not normalized", self.gold)));
        }
        Ok(())
    }

    fn dist(&self, mode: GenerationMode) -> &BTreeMap<String, f64> {
        match mode {
            GenerationMode::Direct => &self.direct_dist,
            GenerationMode::Reasoning => &self.reasoning_dist,
        }
    }

    fn token_range(&self, mode: GenerationMode) -> (usize, usize) {
        match mode {
            GenerationMode::Direct => self.direct_token_range,
            GenerationMode::Reasoning => self.reasoning_token_range,
        }
    }

    /// Distribution reshaped for a sampling temperature: logits are scaled
    /// by `(reference / temperature) ^ sharpness` and renormalized. At the
    /// reference temperature the distribution is unchanged; at temperature
    /// zero it collapses onto its mode.
    pub fn reshaped_dist(&self, mode: GenerationMode, temperature: f64) -> Vec<(String, f64)> {
        let dist = self.dist(mode);
        let support: Vec<(&String, f64)> =
            dist.iter().filter(|(_, p)| **p > 0.0).map(|(l, p)| (l, *p)).collect();
        if temperature <= 0.0 {
            let (label, _) = support
                .iter()
                .fold(None::<(&String, f64)>, |best, &(l, p)| match best {
                    Some((_, bp)) if bp >= p => best,
                    _ => Some((l, p)),
                })
                .expect("validated nonempty distribution");
            return vec![(label.clone(), 1.0)];
        }
        let exponent = (self.reference_temperature / temperature).powf(self.temperature_sharpness);
        // Work in log space to survive extreme exponents.
        let logits: Vec<f64> = support.iter().map(|(_, p)| exponent * p.ln()).collect();
        let max_logit = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - max_logit).exp()).collect();
        let total: f64 = weights.iter().sum();
        support
            .iter()
            .zip(&weights)
            .map(|((label, _), w)| ((*label).clone(), w / total))
            .collect()
    }
}

/// Draw one completion from a profile.
///
/// The answer comes from the temperature-reshaped distribution, the token
/// count uniformly from the mode's range (capped at `max_tokens`), and the
/// latency is `token_count / tokens_per_second`. Token logprobs average to
/// `ln(q) / token_count` for a category of reshaped probability `q`, with
/// small seeded jitter, so higher-probability categories yield higher
/// confidence.
pub fn simulate_sample(
    profile: &SimProblemProfile,
    mode: GenerationMode,
    temperature: f64,
    max_tokens: usize,
    base_seed: u64,
    sample_index: usize,
) -> Completion {
    let seed = sample_seed(base_seed, &profile.problem_id, mode, sample_index);
    let mut rng = ChaCha12Rng::from_seed(seed);

    let reshaped = profile.reshaped_dist(mode, temperature);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut chosen = reshaped.len() - 1;
    for (i, (_, q)) in reshaped.iter().enumerate() {
        acc += q;
        if u < acc {
            chosen = i;
            break;
        }
    }
    let (label, q) = &reshaped[chosen];

    let (lo, hi) = profile.token_range(mode);
    let lo = lo.min(max_tokens);
    let hi = hi.min(max_tokens);
    let token_count = rng.gen_range(lo..=hi);

    let base_logprob = q.ln() / token_count as f64;
    let token_logprobs: Vec<f64> = (0..token_count)
        .map(|_| {
            let jitter: f64 = rng.gen_range(-1.0..1.0);
            base_logprob * (1.0 + 0.1 * jitter)
        })
        .collect();

    let text = match mode {
        GenerationMode::Direct => label.clone(),
        GenerationMode::Reasoning => format!(
            "[simulated reasoning, {token_count} tokens]\n\\boxed{{{label}}}"
        ),
    };

    Completion {
        text,
        answer: None,
        token_logprobs: Some(token_logprobs),
        token_count,
        latency_s: token_count as f64 / profile.tokens_per_second,
        mode,
        sample_index,
    }
}

/// Stateless simulated backend over a set of problem profiles.
pub struct SimBackend {
    profiles: HashMap<String, SimProblemProfile>,
    stats: BackendStats,
}

impl SimBackend {
    pub fn new(profiles: impl IntoIterator<Item = SimProblemProfile>) -> Result<Self> {
        let mut map = HashMap::new();
        for p in profiles {
            p.validate()?;
            if map.insert(p.problem_id.clone(), p).is_some() {
                return Err(Error::InvalidConfig("duplicate profile id".into()));
            }
        }
        Ok(Self {
            profiles: map,
            stats: BackendStats::default(),
        })
    }

    pub fn profile(&self, problem_id: &str) -> Option<&SimProblemProfile> {
        self.profiles.get(problem_id)
    }
}

impl Backend for SimBackend {
    fn generate(&self, request: &GenerationRequest) -> Result<Vec<Completion>> {
        request.validate()?;
        let profile = self
            .profiles
            .get(&request.problem_id)
            .ok_or_else(|| Error::UnknownProblem(request.problem_id.clone()))?;
        let completions: Vec<Completion> = (0..request.n)
            .map(|i| {
                simulate_sample(
                    profile,
                    request.mode,
                    request.temperature,
                    request.max_tokens,
                    request.base_seed,
                    request.first_sample_index + i,
                )
            })
            .collect();
        let tokens: u64 = completions.iter().map(|c| c.token_count as u64).sum();
        let round_latency = completions.iter().map(|c| c.latency_s).fold(0.0, f64::max);
        self.stats.record(completions.len() as u64, tokens, round_latency);
        Ok(completions)
    }

    fn stats(&self) -> BackendStatsSnapshot {
        self.stats.snapshot()
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Simulated
    }
}
