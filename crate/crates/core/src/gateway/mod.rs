//! Chat-completion client with token and latency accounting.
//!
//! Two backends sit behind [`ChatBackend`]: an HTTP client speaking the usual
//! `POST {base_url}/chat/completions` JSON schema, and a scripted mock
//! selected by a `mock://<path-to-script.jsonl>` base URL. Latency is
//! measured end to end around [`Gateway::generate`], retries included.

mod http;
mod mock;

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use http::HttpBackend;
pub use mock::{MockBackend, MockEntry};

use crate::prompt_kit::RenderedPrompt;

pub const API_KEY_ENV: &str = "REASONTRANS_API_KEY";
pub const BASE_URL_ENV: &str = "REASONTRANS_BASE_URL";
pub const MAX_RETRIES: u32 = 10;

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("invalid endpoint config: {0}")]
    Config(String),
    #[error("authentication rejected (HTTP {status}): {body}")]
    Auth { status: u16, body: String },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("transport failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("malformed response: {0}")]
    Protocol(String),
    #[error("mock script: {0}")]
    Mock(String),
    #[error("provider_reported token count requested but the response carried no usage data")]
    MissingUsage,
}

/// An API key that never appears in logs or debug output.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Self {
        Self(key.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0.is_empty() { "ApiKey(<unset>)" } else { "ApiKey(<redacted>)" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerSpec {
    Whitespace,
    #[default]
    ByteLenDiv4,
    ProviderReported,
}

impl std::str::FromStr for TokenizerSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "whitespace" => Ok(TokenizerSpec::Whitespace),
            "byte_len_div4" => Ok(TokenizerSpec::ByteLenDiv4),
            "provider_reported" => Ok(TokenizerSpec::ProviderReported),
            other => Err(format!("unknown tokenizer {other:?}")),
        }
    }
}

/// Counts tokens in `text`. `usage` is the provider-reported count, if any.
pub fn count_tokens(text: &str, spec: TokenizerSpec, usage: Option<u64>) -> Result<u64, GatewayError> {
    match spec {
        TokenizerSpec::Whitespace => Ok(text.split_whitespace().count() as u64),
        TokenizerSpec::ByteLenDiv4 => Ok(text.len() as u64 / 4),
        TokenizerSpec::ProviderReported => usage.ok_or(GatewayError::MissingUsage),
    }
}

fn default_timeout() -> f64 {
    120.0
}
fn default_max_new_tokens() -> u32 {
    4096
}
fn default_retries() -> u32 {
    2
}
fn default_backoff_ms() -> u64 {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model_name: String,
    #[serde(skip)]
    pub api_key: ApiKey,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default = "default_max_new_tokens")]
    pub max_new_tokens: u32,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    /// First backoff delay; doubles on each retry.
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
    /// Estimator used when the provider reports no usage.
    #[serde(default)]
    pub fallback_tokenizer: TokenizerSpec,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model_name: model_name.into(),
            api_key: ApiKey::default(),
            timeout_s: default_timeout(),
            max_new_tokens: default_max_new_tokens(),
            temperature: 0.0,
            retries: default_retries(),
            backoff_base_ms: default_backoff_ms(),
            fallback_tokenizer: TokenizerSpec::default(),
        }
    }

    /// Base URL and key from `REASONTRANS_BASE_URL` / `REASONTRANS_API_KEY`.
    /// An explicit `base_url` wins over the environment.
    pub fn from_env(base_url: Option<&str>, model_name: impl Into<String>) -> Result<Self, GatewayError> {
        let url = match base_url {
            Some(url) => url.to_string(),
            None => std::env::var(BASE_URL_ENV)
                .map_err(|_| GatewayError::Config(format!("no base URL given and {BASE_URL_ENV} is unset")))?,
        };
        let mut config = Self::new(url, model_name);
        if let Ok(key) = std::env::var(API_KEY_ENV) {
            config.api_key = ApiKey::new(key);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            return Err(GatewayError::Config("timeout_s must be positive".into()));
        }
        if self.max_new_tokens == 0 {
            return Err(GatewayError::Config("max_new_tokens must be positive".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(GatewayError::Config("temperature must be non-negative".into()));
        }
        if self.retries > MAX_RETRIES {
            return Err(GatewayError::Config(format!("retries must be at most {MAX_RETRIES}")));
        }
        if self.model_name.trim().is_empty() {
            return Err(GatewayError::Config("model_name is empty".into()));
        }
        let url = reqwest::Url::parse(&self.base_url)
            .map_err(|e| GatewayError::Config(format!("base_url {:?}: {e}", self.base_url)))?;
        if !matches!(url.scheme(), "http" | "https" | "mock") {
            return Err(GatewayError::Config(format!("unsupported base_url scheme {:?}", url.scheme())));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_s)
    }

    /// Worst-case wall time of one `generate` call.
    pub fn time_budget(&self) -> Duration {
        let attempts = self.retries + 1;
        let backoff: u64 = (0..self.retries).map(|i| backoff_delay(self.backoff_base_ms, i + 1)).sum();
        self.timeout() * attempts + Duration::from_millis(backoff)
    }
}

const MAX_BACKOFF_MS: u64 = 30_000;

fn backoff_delay(base_ms: u64, attempt: u32) -> u64 {
    base_ms.saturating_mul(1u64 << (attempt - 1).min(20)).min(MAX_BACKOFF_MS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    Stop,
    Length,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub text: String,
    pub generated_tokens: u64,
    /// True when `generated_tokens` came from the local estimator.
    pub tokens_estimated: bool,
    pub latency_s: f64,
    pub finish_reason: FinishReason,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub prompt: String,
    pub max_new_tokens: u32,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawCompletion {
    pub text: String,
    pub usage_tokens: Option<u64>,
    pub finish_reason: FinishReason,
}

/// Failure of a single attempt.
#[derive(Debug)]
pub enum AttemptError {
    /// Worth retrying: connection problems, timeouts, 5xx.
    Transient(String),
    Fatal(GatewayError),
}

/// Maps a non-success HTTP status to an attempt error.
pub fn status_error(status: u16, body: &str) -> AttemptError {
    let body: String = body.chars().take(512).collect();
    match status {
        401 | 403 => AttemptError::Fatal(GatewayError::Auth { status, body }),
        400..=499 => AttemptError::Fatal(GatewayError::Http { status, body }),
        _ => AttemptError::Transient(format!("HTTP {status}: {body}")),
    }
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest, api_key: &ApiKey, timeout: Duration) -> Result<RawCompletion, AttemptError>;
}

/// A configured endpoint. Cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct Gateway {
    config: EndpointConfig,
    backend: Arc<dyn ChatBackend>,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway").field("config", &self.config).finish_non_exhaustive()
    }
}

impl Gateway {
    /// Picks the backend from the URL scheme.
    pub fn new(config: EndpointConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        let backend: Arc<dyn ChatBackend> = if let Some(path) = config.base_url.strip_prefix("mock://") {
            Arc::new(MockBackend::from_file(std::path::Path::new(path))?)
        } else {
            Arc::new(HttpBackend::new(&config.base_url)?)
        };
        Ok(Self { config, backend })
    }

    pub fn with_backend(config: EndpointConfig, backend: Arc<dyn ChatBackend>) -> Result<Self, GatewayError> {
        config.validate()?;
        Ok(Self { config, backend })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    pub fn generate(&self, prompt: &RenderedPrompt) -> Result<GenerationResult, GatewayError> {
        self.generate_text(&prompt.text)
    }

    pub fn generate_text(&self, prompt: &str) -> Result<GenerationResult, GatewayError> {
        if prompt.is_empty() {
            return Err(GatewayError::Config("prompt is empty".into()));
        }
        let request = ChatRequest {
            model: self.config.model_name.clone(),
            prompt: prompt.to_string(),
            max_new_tokens: self.config.max_new_tokens,
            temperature: self.config.temperature,
        };
        let started = Instant::now();
        let max_attempts = self.config.retries + 1;
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.backend.complete(&request, &self.config.api_key, self.config.timeout()) {
                Ok(raw) => {
                    let latency_s = started.elapsed().as_secs_f64();
                    let (generated_tokens, tokens_estimated) = match raw.usage_tokens {
                        Some(n) => (n, false),
                        None => {
                            let spec = match self.config.fallback_tokenizer {
                                TokenizerSpec::ProviderReported => TokenizerSpec::ByteLenDiv4,
                                other => other,
                            };
                            (count_tokens(&raw.text, spec, None)?, true)
                        }
                    };
                    return Ok(GenerationResult {
                        text: raw.text,
                        generated_tokens,
                        tokens_estimated,
                        latency_s,
                        finish_reason: raw.finish_reason,
                        attempts: attempt,
                    });
                }
                Err(AttemptError::Fatal(e)) => return Err(e),
                Err(AttemptError::Transient(message)) => {
                    tracing::warn!(attempt, max_attempts, %message, "transient gateway failure");
                    if attempt >= max_attempts {
                        return Err(GatewayError::Transport { attempts: attempt, message });
                    }
                    std::thread::sleep(Duration::from_millis(backoff_delay(self.config.backoff_base_ms, attempt)));
                }
            }
        }
    }
}

/// One-shot convenience over [`Gateway`].
pub fn generate(config: &EndpointConfig, prompt: &RenderedPrompt) -> Result<GenerationResult, GatewayError> {
    Gateway::new(config.clone())?.generate(prompt)
}
