//! Generation backends.
//!
//! A backend turns a [`GenerationRequest`] into a batch of completions.
//! Two implementations exist: a deterministic simulator for desk-scale
//! experiments and an HTTP client for OpenAI-compatible endpoints. Both
//! must be safe to call concurrently from any number of strategy runners.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::answer::{Completion, GenerationMode};
use crate::error::{Error, Result};

mod http;
mod sim;

pub use http::{EndpointConfig, HttpBackend};
pub use sim::{simulate_sample, SimBackend, SimProblemProfile};

/// One batch generation request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub problem_id: String,
    pub prompt: String,
    pub mode: GenerationMode,
    /// Number of samples to draw.
    pub n: usize,
    pub temperature: f64,
    pub max_tokens: usize,
    pub base_seed: u64,
    /// `sample_index` of the first completion in the batch.
    pub first_sample_index: usize,
}

impl GenerationRequest {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidRequest("n must be at least 1".into()));
        }
        if self.max_tokens < 1 {
            return Err(Error::InvalidRequest("max_tokens must be at least 1".into()));
        }
        if self.temperature < 0.0 || !self.temperature.is_finite() {
            return Err(Error::InvalidRequest(format!(
                "temperature must be finite and nonnegative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Simulated,
    Http,
}

/// Monotone request/completion/token counters plus accumulated wall time
/// (simulated for the simulator, measured for HTTP).
#[derive(Debug, Default)]
pub struct BackendStats {
    requests: AtomicU64,
    completions: AtomicU64,
    tokens: AtomicU64,
    wall_latency_us: AtomicU64,
}

impl BackendStats {
    pub fn record(&self, completions: u64, tokens: u64, wall_latency_s: f64) {
        self.requests.fetch_add(1, Ordering::Relaxed);
        self.completions.fetch_add(completions, Ordering::Relaxed);
        self.tokens.fetch_add(tokens, Ordering::Relaxed);
        self.wall_latency_us
            .fetch_add((wall_latency_s * 1e6) as u64, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> BackendStatsSnapshot {
        BackendStatsSnapshot {
            requests: self.requests.load(Ordering::Relaxed),
            completions: self.completions.load(Ordering::Relaxed),
            tokens: self.tokens.load(Ordering::Relaxed),
            wall_latency_s: self.wall_latency_us.load(Ordering::Relaxed) as f64 / 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackendStatsSnapshot {
    pub requests: u64,
    pub completions: u64,
    pub tokens: u64,
    pub wall_latency_s: f64,
}

/// Contract shared by all generation backends.
///
/// `generate` returns `request.n` completions with consecutive sample
/// indices starting at `first_sample_index`. The simulated backend must be
/// bit-deterministic in the request (including `base_seed`); completions
/// within a request are mutually independent draws.
pub trait Backend: Send + Sync {
    fn generate(&self, request: &GenerationRequest) -> Result<Vec<Completion>>;
    fn stats(&self) -> BackendStatsSnapshot;
    fn kind(&self) -> BackendKind;
}

/// Stable seed derivation for repeats and sweeps.
pub fn derive_seed(base: u64, tag: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"seersc.derive.v1");
    h.update(base.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Counter-based per-sample seed: a pure function of the request identity,
/// so results are independent of scheduling and arrival order.
pub(crate) fn sample_seed(
    base_seed: u64,
    problem_id: &str,
    mode: GenerationMode,
    sample_index: usize,
) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"seersc.sample.v1");
    h.update(base_seed.to_le_bytes());
    h.update([match mode {
        GenerationMode::Direct => 0u8,
        GenerationMode::Reasoning => 1u8,
    }]);
    h.update((problem_id.len() as u64).to_le_bytes());
    h.update(problem_id.as_bytes());
    h.update((sample_index as u64).to_le_bytes());
    h.finalize().into()
}
