//! Execution and length rewards, their combination, and the HTTP service
//! trainers call to score rollouts.

use std::net::SocketAddr;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::TestSuite;
use crate::error::{Error, Result};
use crate::gateway::{count_tokens, TokenizerSpec};
use crate::lang::LanguageId;
use crate::prompt_kit::parse_completion;
use crate::sandbox::{Executor, TestReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LengthUnit {
    #[default]
    Tokens,
    Characters,
}

/// What the reference text holds, and therefore what part of a completion is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// References are whole outputs (reasoning and code); completions are measured whole.
    #[default]
    FullOutput,
    /// References are target code only; completions are measured on their extracted code.
    CodeOnly,
}

fn default_max_length() -> u64 {
    4096
}
fn default_tolerance() -> f64 {
    0.2
}
fn default_tokenizer() -> TokenizerSpec {
    TokenizerSpec::Whitespace
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthRewardConfig {
    #[serde(default = "default_max_length")]
    pub max_length: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub length_unit: LengthUnit,
    /// Tokenizer used when `length_unit` is `tokens`.
    #[serde(default = "default_tokenizer")]
    pub tokenizer: TokenizerSpec,
    #[serde(default)]
    pub reference_mode: ReferenceMode,
}

impl Default for LengthRewardConfig {
    fn default() -> Self {
        Self {
            max_length: default_max_length(),
            tolerance: default_tolerance(),
            length_unit: LengthUnit::Tokens,
            tokenizer: default_tokenizer(),
            reference_mode: ReferenceMode::FullOutput,
        }
    }
}

impl LengthRewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Schema {
                field: "config.tolerance".into(),
                message: "must be a positive number".into(),
            });
        }
        if self.max_length < 1 {
            return Err(Error::Schema {
                field: "config.max_length".into(),
                message: "must be at least 1".into(),
            });
        }
        if self.length_unit == LengthUnit::Tokens && self.tokenizer == TokenizerSpec::ProviderReported {
            return Err(Error::Schema {
                field: "config.tokenizer".into(),
                message: "provider_reported cannot measure arbitrary text".into(),
            });
        }
        Ok(())
    }

    /// Len() for this configuration.
    pub fn measure(&self, text: &str) -> u64 {
        match self.length_unit {
            LengthUnit::Characters => text.chars().count() as u64,
            LengthUnit::Tokens => count_tokens(text, self.tokenizer, None).unwrap_or(0),
        }
    }
}

/// `(w_exec, w_len)`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights(pub f64, pub f64);

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights(1.0, 1.0)
    }
}

impl RewardWeights {
    pub fn execution(&self) -> f64 {
        self.0
    }

    pub fn length(&self) -> f64 {
        self.1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.0.is_finite() && self.1.is_finite()) {
            return Err(Error::Schema {
                field: "weights".into(),
                message: "weights must be finite".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub execution: f64,
    pub length: f64,
    pub combined: f64,
    pub weights: RewardWeights,
}

/// Length reward for one pair of measured lengths.
pub fn length_reward_value(l_c: u64, l_g: u64, tolerance: f64, max_length: u64) -> Result<f64> {
    if l_g == 0 {
        return Err(Error::Invalid("reference length is zero".into()));
    }
    if l_c < l_g || l_c > max_length {
        return Ok(0.0);
    }
    let excess = (l_c - l_g) as f64;
    let l_g = l_g as f64;
    if excess / l_g <= tolerance {
        Ok((1.0 - excess / (tolerance * l_g)).max(0.0))
    } else {
        Ok(0.1)
    }
}

/// Length rewards over texts as given. See [`combined_reward`] for code-only mode.
pub fn length_reward(completions: &[String], references: &[String], config: &LengthRewardConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if completions.len() != references.len() {
        return Err(Error::Invalid(format!(
            "{} completions but {} references",
            completions.len(),
            references.len()
        )));
    }
    completions
        .iter()
        .zip(references)
        .enumerate()
        .map(|(i, (c, r))| {
            length_reward_value(config.measure(c), config.measure(r), config.tolerance, config.max_length)
                .map_err(|_| Error::Schema {
                    field: format!("references[{i}]"),
                    message: "reference has zero length".into(),
                })
        })
        .collect()
}

/// Extracts, runs and scores one completion. Any failure scores 0.
fn score_one(executor: &Executor, completion: &str, suite: &TestSuite, language: LanguageId) -> (f64, Option<TestReport>) {
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let parsed = parse_completion(completion, language);
        executor.evaluate(&parsed.code, suite, language)
    }));
    match outcome {
        Ok(report) => {
            if !report.compiled {
                tracing::debug!(diagnostics = %report.diagnostics, "completion did not compile");
            }
            (report.pass_fraction(), Some(report))
        }
        Err(_) => {
            tracing::warn!("sandbox panicked while scoring a completion; reward 0");
            (0.0, None)
        }
    }
}

/// Execution rewards with the reports behind them (`None` when scoring itself failed).
pub fn execution_reward_detailed(
    executor: &Executor,
    completions: &[String],
    language: LanguageId,
    suites: &[TestSuite],
) -> Result<Vec<(f64, Option<TestReport>)>> {
    if completions.len() != suites.len() {
        return Err(Error::Invalid(format!(
            "{} completions but {} suites",
            completions.len(),
            suites.len()
        )));
    }
    let items: Vec<(&String, &TestSuite)> = completions.iter().zip(suites).collect();
    Ok(executor.map_parallel(&items, |(c, s)| score_one(executor, c, s, language)))
}

/// passed/total per completion, 0 on any failure.
pub fn execution_reward(
    executor: &Executor,
    completions: &[String],
    language: LanguageId,
    suites: &[TestSuite],
) -> Result<Vec<f64>> {
    Ok(execution_reward_detailed(executor, completions, language, suites)?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}

pub fn combined_reward(
    executor: &Executor,
    completions: &[String],
    references: &[String],
    language: LanguageId,
    suites: &[TestSuite],
    config: &LengthRewardConfig,
    weights: RewardWeights,
) -> Result<Vec<RewardBreakdown>> {
    weights.validate()?;
    let measured: Vec<String> = match config.reference_mode {
        ReferenceMode::FullOutput => completions.to_vec(),
        ReferenceMode::CodeOnly => completions
            .iter()
            .map(|c| parse_completion(c, language).code)
            .collect(),
    };
    let length = length_reward(&measured, references, config)?;
    let execution = execution_reward(executor, completions, language, suites)?;
    Ok(execution
        .into_iter()
        .zip(length)
        .map(|(e, l)| RewardBreakdown {
            execution: e,
            length: l,
            combined: weights.0 * e + weights.1 * l,
            weights,
        })
        .collect())
}

/// Request body of `POST /v1/rewards`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardRequest {
    pub completions: Vec<String>,
    pub references: Vec<String>,
    pub language: LanguageId,
    pub suites: Vec<TestSuite>,
    #[serde(default)]
    pub config: Option<LengthRewardConfig>,
    #[serde(default)]
    pub weights: Option<RewardWeights>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewardResponse {
    pub rewards: Vec<RewardBreakdown>,
}

/// Server-side defaults applied when a request omits `config` or `weights`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardDefaults {
    #[serde(default)]
    pub config: LengthRewardConfig,
    #[serde(default)]
    pub weights: RewardWeights,
}

impl RewardRequest {
    /// Checks alignment and per-item preconditions, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let n = self.completions.len();
        for (field, len) in [("references", self.references.len()), ("suites", self.suites.len())] {
            if len != n {
                return Err(Error::Schema {
                    field: field.into(),
                    message: format!("has {len} items but completions has {n}"),
                });
            }
        }
        for (i, suite) in self.suites.iter().enumerate() {
            suite.validate().map_err(|e| Error::Schema {
                field: format!("suites[{i}]"),
                message: e.to_string(),
            })?;
        }
        if let Some(config) = &self.config {
            config.validate()?;
        }
        if let Some(weights) = &self.weights {
            weights.validate()?;
        }
        Ok(())
    }
}

/// Library entry point the service uses; also handy for checking the two agree.
pub fn score_request(executor: &Executor, request: &RewardRequest, defaults: &RewardDefaults) -> Result<RewardResponse> {
    request.validate()?;
    let config = request.config.unwrap_or(defaults.config);
    let weights = request.weights.unwrap_or(defaults.weights);
    let rewards = combined_reward(
        executor,
        &request.completions,
        &request.references,
        request.language,
        &request.suites,
        &config,
        weights,
    )?;
    Ok(RewardResponse { rewards })
}

struct ServiceState {
    executor: Executor,
    defaults: RewardDefaults,
}

fn bad_request(field: Option<String>, message: String) -> Response {
    let mut body = json!({ "error": message });
    if let Some(field) = field {
        body["field"] = json!(field);
    }
    (StatusCode::BAD_REQUEST, Json(body)).into_response()
}

async fn rewards_handler(State(state): State<Arc<ServiceState>>, body: Bytes) -> Response {
    let mut de = serde_json::Deserializer::from_slice(&body);
    let request: RewardRequest = match serde_path_to_error::deserialize(&mut de) {
        Ok(r) => r,
        Err(err) => {
            let path = err.path().to_string();
            let field = (path != ".").then_some(path);
            return bad_request(field, err.into_inner().to_string());
        }
    };
    if let Err(err) = request.validate() {
        return match err {
            Error::Schema { field, message } => bad_request(Some(field), message),
            other => bad_request(None, other.to_string()),
        };
    }
    let result = tokio::task::spawn_blocking(move || score_request(&state.executor, &request, &state.defaults)).await;
    match result {
        Ok(Ok(response)) => (StatusCode::OK, Json(response)).into_response(),
        Ok(Err(Error::Schema { field, message })) => bad_request(Some(field), message),
        Ok(Err(other)) => bad_request(None, other.to_string()),
        Err(join) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({ "error": format!("scoring task failed: {join}") })),
        )
            .into_response(),
    }
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn router(executor: Executor, defaults: RewardDefaults) -> Router {
    let state = Arc::new(ServiceState { executor, defaults });
    Router::new()
        .route("/v1/rewards", post(rewards_handler))
        .route("/healthz", get(healthz))
        .with_state(state)
}

/// Serves on an already-bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    executor: Executor,
    defaults: RewardDefaults,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<()> {
    let addr = listener.local_addr().map_err(|e| Error::io("listener", e))?;
    tracing::info!(%addr, "reward service listening");
    axum::serve(listener, router(executor, defaults))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|e| Error::io("reward service", e))
}

/// Binds `bind` and serves until Ctrl-C.
pub fn serve_rewards(bind: SocketAddr, executor: Executor, defaults: RewardDefaults) -> Result<()> {
    defaults.config.validate()?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::io("tokio runtime", e))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .map_err(|e| Error::io(bind.to_string(), e))?;
        serve_on(listener, executor, defaults, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })
}
