//! Evaluation runner over a parallel-function dataset.
//!
//! For each function implemented in both languages of a pair: render the
//! prompt from the source implementation, generate, parse, run the full
//! suite on the target side and score CodeBLEU against the target
//! implementation. Per-sample failures degrade that sample and never abort
//! the pair.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{self, ParallelFunction};
use crate::error::{Error, Result};
use crate::gateway::{EndpointConfig, Gateway};
use crate::lang::LanguagePair;
use crate::metrics::{aggregate_report, score_records, CodeBleuWeights, EvalRecord, MetricsReport};
use crate::prompt_kit::{parse_completion, render_sft_style_prompt, render_synthesis_prompt, RenderedPrompt};
use crate::sandbox::{ExecLimits, Executor, TestReport};

pub const RECORDS_FILE: &str = "records.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    #[default]
    SftStyle,
    Synthesis,
}

fn default_workers() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub dataset_path: PathBuf,
    pub pairs: Vec<LanguagePair>,
    pub endpoint: EndpointConfig,
    #[serde(default)]
    pub prompt_kind: PromptKind,
    #[serde(default)]
    pub limits: ExecLimits,
    /// Recorded with the results; only the endpoint's sampling settings
    /// depend on it, and endpoints are not assumed to be deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Method label for report rows.
    #[serde(default)]
    pub method: String,
    #[serde(default)]
    pub codebleu_weights: Option<CodeBleuWeights>,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl EvalConfig {
    pub fn new(dataset_path: impl Into<PathBuf>, pairs: Vec<LanguagePair>, endpoint: EndpointConfig) -> Self {
        Self {
            dataset_path: dataset_path.into(),
            pairs,
            endpoint,
            prompt_kind: PromptKind::default(),
            limits: ExecLimits::default(),
            seed: 0,
            out_dir: None,
            method: String::new(),
            codebleu_weights: None,
            workers: default_workers(),
        }
    }

    pub fn weights(&self) -> CodeBleuWeights {
        self.codebleu_weights.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::Invalid("evaluation config lists no language pairs".into()));
        }
        if let Some(p) = self.pairs.iter().find(|p| !p.is_valid()) {
            return Err(Error::SameLanguage(p.source));
        }
        if self.workers == 0 {
            return Err(Error::Invalid("workers must be positive".into()));
        }
        self.weights().validate()?;
        self.limits.validate()?;
        self.endpoint.validate()?;
        Ok(())
    }
}

fn render(kind: PromptKind, code: &str, pair: LanguagePair) -> Result<RenderedPrompt> {
    match kind {
        PromptKind::SftStyle => render_sft_style_prompt(code, pair.source, pair.target),
        PromptKind::Synthesis => render_synthesis_prompt(code, pair.source, pair.target),
    }
}

/// Translates and scores one function. Never fails for model-side problems.
pub fn evaluate_function(
    gateway: &Gateway,
    executor: &Executor,
    function: &ParallelFunction,
    pair: LanguagePair,
    kind: PromptKind,
) -> Result<EvalRecord> {
    let missing = |lang| Error::Invalid(format!("{} has no {lang} implementation", function.id));
    let source = function.code(pair.source).ok_or_else(|| missing(pair.source))?;
    let reference = function.code(pair.target).ok_or_else(|| missing(pair.target))?;
    let prompt = render(kind, source, pair)?;
    let (hypothesis, report, tokens, latency, estimated) = match gateway.generate(&prompt) {
        Ok(generation) => {
            let code = parse_completion(&generation.text, pair.target).code;
            let report = executor.evaluate(&code, &function.suite, pair.target);
            (code, report, generation.generated_tokens, generation.latency_s, generation.tokens_estimated)
        }
        Err(e) => {
            tracing::warn!(sample = %function.id, error = %e, "generation failed");
            (String::new(), TestReport::not_compiled(function.suite.len(), e.to_string()), 0, 0.0, false)
        }
    };
    Ok(EvalRecord {
        sample_id: function.id.clone(),
        pair,
        generated_tokens: tokens,
        latency_s: latency,
        report,
        hypothesis_code: hypothesis,
        reference_code: reference.to_string(),
        tokens_estimated: estimated,
    })
}

/// Records and the aggregated row for `pair`.
pub fn evaluate_functions(
    functions: &[ParallelFunction],
    pair: LanguagePair,
    config: &EvalConfig,
    gateway: &Gateway,
    executor: &Executor,
) -> Result<(MetricsReport, Vec<EvalRecord>)> {
    executor.toolchains().require(pair.target)?;
    let eligible: Vec<&ParallelFunction> = functions
        .iter()
        .filter(|f| f.code(pair.source).is_some() && f.code(pair.target).is_some())
        .collect();
    if eligible.is_empty() {
        return Err(Error::Invalid(format!("no dataset function implements both sides of {pair}")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Invalid(format!("evaluation worker pool: {e}")))?;
    use rayon::prelude::*;
    let records: Vec<EvalRecord> = pool.install(|| {
        eligible
            .par_iter()
            .map(|f| evaluate_function(gateway, executor, f, pair, config.prompt_kind))
            .collect::<Result<_>>()
    })?;
    let mut report = report_for(&records, config.weights())?;
    report.method = config.method.clone();
    Ok((report, records))
}

/// Aggregates records that all belong to one pair.
fn report_for(records: &[EvalRecord], weights: CodeBleuWeights) -> Result<MetricsReport> {
    let scores = score_records(records, weights)?;
    let mut rows = aggregate_report(records, &scores)?;
    if rows.len() != 1 {
        return Err(Error::Invalid(format!("expected one language pair, found {}", rows.len())));
    }
    Ok(rows.remove(0))
}

/// Loads the dataset named in `config` and evaluates one pair.
pub fn evaluate_pair(config: &EvalConfig, pair: LanguagePair) -> Result<(MetricsReport, Vec<EvalRecord>)> {
    config.validate()?;
    let functions = corpus::load_parallel_functions(&config.dataset_path)?;
    let gateway = Gateway::new(config.endpoint.clone())?;
    let executor = Executor::new(Default::default(), config.limits);
    evaluate_functions(&functions, pair, config, &gateway, &executor)
}

/// Offline re-scoring of stored records: one row per pair.
pub fn rescore(records: &[EvalRecord], weights: CodeBleuWeights, method: &str) -> Result<Vec<MetricsReport>> {
    let scores = score_records(records, weights)?;
    let mut rows = aggregate_report(records, &scores)?;
    for row in &mut rows {
        row.method = method.to_string();
    }
    Ok(rows)
}

pub fn write_records(path: &Path, records: &[EvalRecord]) -> Result<()> {
    corpus::write_jsonl(path, records)
}

pub fn load_records(path: &Path) -> Result<Vec<EvalRecord>> {
    Ok(corpus::read_jsonl(path)?.into_iter().map(|(_, r)| r).collect())
}
