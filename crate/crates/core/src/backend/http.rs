//! HTTP client for OpenAI-compatible chat-completions endpoints.
//!
//! One `generate` call issues one chat/completions request with `n` choices
//! and per-token logprob capture. Responses missing logprobs degrade
//! gracefully: completions carry `token_logprobs: None` and downstream
//! confidence defaults to 1. A global in-flight cap bounds concurrency and
//! failures retry with exponential backoff.

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::answer::{Completion, GenerationMode};
use crate::error::{Error, Result};

use super::{derive_seed, Backend, BackendKind, BackendStats, BackendStatsSnapshot, GenerationRequest};

fn default_in_flight() -> usize {
    8
}

fn default_timeout() -> f64 {
    600.0
}

fn default_attempts() -> usize {
    3
}

fn default_backoff_ms() -> u64 {
    250
}

/// Connection settings for an OpenAI-compatible endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Base URL up to but excluding `/chat/completions`,
    /// e.g. `https://api.example.com/v1`.
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token. Empty or
    /// absent means no Authorization header.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    /// Total attempts per request, including the first.
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
    /// Backoff before the second attempt; doubles per further attempt.
    #[serde(default = "default_backoff_ms")]
    pub initial_backoff_ms: u64,
}

impl EndpointConfig {
    /// Config for `base_url` and `model` with every knob at its default.
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: None,
            max_in_flight: default_in_flight(),
            timeout_s: default_timeout(),
            max_attempts: default_attempts(),
            initial_backoff_ms: default_backoff_ms(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_url.is_empty() {
            return Err(Error::InvalidConfig("endpoint base_url is empty".into()));
        }
        if self.model.is_empty() {
            return Err(Error::InvalidConfig("endpoint model is empty".into()));
        }
        if self.max_in_flight == 0 {
            return Err(Error::InvalidConfig("max_in_flight must be at least 1".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig("max_attempts must be at least 1".into()));
        }
        if !(self.timeout_s > 0.0) {
            return Err(Error::InvalidConfig("timeout_s must be positive".into()));
        }
        Ok(())
    }
}

/// Counting gate bounding concurrent HTTP calls.
struct Gate {
    permits: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    fn new(permits: usize) -> Self {
        Self {
            permits: Mutex::new(permits),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> GatePermit<'_> {
        let mut available = self.permits.lock().unwrap();
        while *available == 0 {
            available = self.freed.wait(available).unwrap();
        }
        *available -= 1;
        GatePermit { gate: self }
    }
}

struct GatePermit<'a> {
    gate: &'a Gate,
}

impl Drop for GatePermit<'_> {
    fn drop(&mut self) {
        *self.gate.permits.lock().unwrap() += 1;
        self.gate.freed.notify_one();
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    n: usize,
    temperature: f64,
    max_tokens: usize,
    logprobs: bool,
    seed: u64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
    #[serde(default)]
    logprobs: Option<ChoiceLogprobs>,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct ChoiceLogprobs {
    #[serde(default)]
    content: Option<Vec<TokenLogprob>>,
}

#[derive(Deserialize)]
struct TokenLogprob {
    logprob: f64,
}

#[derive(Deserialize)]
struct Usage {
    #[serde(default)]
    completion_tokens: Option<u64>,
}

const REASONING_INSTRUCTION: &str =
    "Reason step by step. End with your final answer in \\boxed{...}.";
const DIRECT_INSTRUCTION: &str =
    "Answer with only the final answer on a single line. Do not explain.";

/// Blocking client for OpenAI-compatible chat-completions serving stacks.
pub struct HttpBackend {
    config: EndpointConfig,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
    gate: Gate,
    stats: BackendStats,
}

impl HttpBackend {
    pub fn new(config: EndpointConfig) -> Result<Self> {
        config.validate()?;
        let api_key = match config.api_key_env.as_deref() {
            None | Some("") => None,
            Some(var) => Some(std::env::var(var).map_err(|_| {
                Error::InvalidConfig(format!("environment variable {var} is not set"))
            })?),
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_s))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("http client: {e}")))?;
        let gate = Gate::new(config.max_in_flight);
        Ok(Self {
            config,
            api_key,
            client,
            gate,
            stats: BackendStats::default(),
        })
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn call_once(&self, body: &ChatRequest<'_>) -> std::result::Result<ChatResponse, (bool, String)> {
        let _permit = self.gate.acquire();
        let mut builder = self.client.post(self.url()).json(body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder
            .send()
            .map_err(|e| (true, format!("transport: {e}")))?;
        let status = response.status();
        if status.is_success() {
            response
                .json::<ChatResponse>()
                .map_err(|e| (false, format!("malformed response body: {e}")))
        } else {
            let retryable = status.as_u16() == 429 || status.is_server_error();
            let body = response.text().unwrap_or_default();
            let excerpt: String = body.trim().chars().take(200).collect();
            let detail = if excerpt.is_empty() {
                String::new()
            } else {
                format!(": {excerpt}")
            };
            Err((retryable, format!("status {status}{detail}")))
        }
    }
}

impl Backend for HttpBackend {
    fn generate(&self, request: &GenerationRequest) -> Result<Vec<Completion>> {
        request.validate()?;
        let instruction = match request.mode {
            GenerationMode::Direct => DIRECT_INSTRUCTION,
            GenerationMode::Reasoning => REASONING_INSTRUCTION,
        };
        let body = ChatRequest {
            model: &self.config.model,
            messages: vec![
                ChatMessage {
                    role: "system",
                    content: instruction,
                },
                ChatMessage {
                    role: "user",
                    content: &request.prompt,
                },
            ],
            n: request.n,
            temperature: request.temperature,
            max_tokens: request.max_tokens,
            logprobs: true,
            seed: derive_seed(request.base_seed, &request.problem_id, request.first_sample_index as u64),
        };

        let started = Instant::now();
        let mut attempts: u32 = 0;
        let parsed = loop {
            attempts += 1;
            match self.call_once(&body) {
                Ok(parsed) => break parsed,
                Err((retryable, message)) => {
                    if !retryable || attempts as usize >= self.config.max_attempts {
                        return Err(Error::Backend { attempts, message });
                    }
                    let backoff = self.config.initial_backoff_ms << (attempts - 1).min(16);
                    std::thread::sleep(Duration::from_millis(backoff));
                }
            }
        };
        let latency_s = started.elapsed().as_secs_f64();

        if parsed.choices.len() != request.n {
            return Err(Error::Backend {
                attempts,
                message: format!(
                    "expected {} choices, got {}",
                    request.n,
                    parsed.choices.len()
                ),
            });
        }

        let usage_per_choice = parsed
            .usage
            .as_ref()
            .and_then(|u| u.completion_tokens)
            .map(|t| (t as usize).div_ceil(request.n));

        let completions = parsed
            .choices
            .into_iter()
            .enumerate()
            .map(|(i, choice)| {
                let text = choice.message.content.unwrap_or_default();
                let token_logprobs: Option<Vec<f64>> = choice
                    .logprobs
                    .and_then(|lp| lp.content)
                    .map(|tokens| tokens.into_iter().map(|t| t.logprob).collect());
                let token_count = match &token_logprobs {
                    Some(lp) if !lp.is_empty() => lp.len(),
                    _ => usage_per_choice
                        .unwrap_or_else(|| text.split_whitespace().count().max(1)),
                };
                Completion {
                    text,
                    answer: None,
                    token_logprobs,
                    token_count,
                    latency_s,
                    mode: request.mode,
                    sample_index: request.first_sample_index + i,
                }
            })
            .collect::<Vec<_>>();

        let tokens: u64 = completions.iter().map(|c| c.token_count as u64).sum();
        self.stats.record(completions.len() as u64, tokens, latency_s);
        Ok(completions)
    }

    fn stats(&self) -> BackendStatsSnapshot {
        self.stats.snapshot()
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Http
    }
}
