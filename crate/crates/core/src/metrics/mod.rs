//! Evaluation metrics: computational accuracy, average pass rate, CodeBLEU,
//! mean generated tokens and mean latency.

pub mod codebleu;
pub mod dataflow;
pub mod grammar;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use codebleu::{codebleu, CodeBleuScore, CodeBleuWeights};

use crate::error::{Error, Result};
use crate::lang::LanguagePair;
use crate::sandbox::TestReport;

/// One translated function with everything the metrics need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub sample_id: String,
    pub pair: LanguagePair,
    pub generated_tokens: u64,
    pub latency_s: f64,
    pub report: TestReport,
    pub hypothesis_code: String,
    pub reference_code: String,
    #[serde(default)]
    pub tokens_estimated: bool,
}

impl EvalRecord {
    pub fn passed_all(&self) -> bool {
        self.report.compiled && self.report.total > 0 && self.report.passed == self.report.total
    }
}

fn non_empty(records: &[EvalRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Invalid("no evaluation records".into()));
    }
    Ok(())
}

/// Percentage of records that compiled and passed every case.
pub fn computational_accuracy(records: &[EvalRecord]) -> Result<f64> {
    non_empty(records)?;
    let passed = records.iter().filter(|r| r.passed_all()).count();
    Ok(100.0 * passed as f64 / records.len() as f64)
}

/// 100 × mean of passed/total.
pub fn average_pass_rate(records: &[EvalRecord]) -> Result<f64> {
    non_empty(records)?;
    let mut sum = 0.0;
    for r in records {
        if r.report.total == 0 {
            return Err(Error::Invalid(format!("record {} has an empty test report", r.sample_id)));
        }
        sum += r.report.pass_fraction();
    }
    Ok(100.0 * sum / records.len() as f64)
}

pub fn avg_tokens(records: &[EvalRecord]) -> Result<f64> {
    non_empty(records)?;
    Ok(records.iter().map(|r| r.generated_tokens as f64).sum::<f64>() / records.len() as f64)
}

pub fn avg_latency(records: &[EvalRecord]) -> Result<f64> {
    non_empty(records)?;
    Ok(records.iter().map(|r| r.latency_s).sum::<f64>() / records.len() as f64)
}

/// CodeBLEU for a record; an empty hypothesis scores 0 with the parse-failure flag.
pub fn score_record(record: &EvalRecord, weights: CodeBleuWeights) -> Result<CodeBleuScore> {
    if record.hypothesis_code.trim().is_empty() {
        weights.validate()?;
        return Ok(CodeBleuScore {
            ngram: 0.0,
            weighted_ngram: 0.0,
            ast_match: 0.0,
            dataflow_match: 0.0,
            total: 0.0,
            weights,
            hypothesis_parse_failed: true,
        });
    }
    codebleu(&record.hypothesis_code, &record.reference_code, record.pair.target, weights).map_err(|e| {
        Error::Invalid(format!("CodeBLEU for {}: {e}", record.sample_id))
    })
}

/// Scores records in parallel, preserving order.
pub fn score_records(records: &[EvalRecord], weights: CodeBleuWeights) -> Result<Vec<CodeBleuScore>> {
    records.par_iter().map(|r| score_record(r, weights)).collect()
}

/// One table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub pair: LanguagePair,
    #[serde(default)]
    pub method: String,
    pub n_samples: usize,
    pub ca_pct: f64,
    pub apr_pct: f64,
    pub codebleu_pct: f64,
    pub avg_tokens: f64,
    pub avg_latency_s: f64,
    /// True when any token count came from the local estimator.
    #[serde(default)]
    pub tokens_estimated: bool,
    #[serde(default)]
    pub codebleu_parse_failures: usize,
}

fn aggregate_one(pair: LanguagePair, records: &[&EvalRecord], scores: &[&CodeBleuScore]) -> Result<MetricsReport> {
    let owned: Vec<EvalRecord> = records.iter().map(|r| (*r).clone()).collect();
    let codebleu_pct = 100.0 * scores.iter().map(|s| s.total).sum::<f64>() / scores.len() as f64;
    Ok(MetricsReport {
        pair,
        method: String::new(),
        n_samples: owned.len(),
        ca_pct: computational_accuracy(&owned)?,
        apr_pct: average_pass_rate(&owned)?,
        codebleu_pct,
        avg_tokens: avg_tokens(&owned)?,
        avg_latency_s: avg_latency(&owned)?,
        tokens_estimated: owned.iter().any(|r| r.tokens_estimated),
        codebleu_parse_failures: scores.iter().filter(|s| s.hypothesis_parse_failed).count(),
    })
}

/// One row per language pair present in `records`, in pair order.
pub fn aggregate_report(records: &[EvalRecord], scores: &[CodeBleuScore]) -> Result<Vec<MetricsReport>> {
    non_empty(records)?;
    if records.len() != scores.len() {
        return Err(Error::Invalid(format!(
            "{} records but {} CodeBLEU scores",
            records.len(),
            scores.len()
        )));
    }
    let mut groups: BTreeMap<LanguagePair, (Vec<&EvalRecord>, Vec<&CodeBleuScore>)> = BTreeMap::new();
    for (r, s) in records.iter().zip(scores) {
        let entry = groups.entry(r.pair).or_default();
        entry.0.push(r);
        entry.1.push(s);
    }
    groups
        .into_iter()
        .map(|(pair, (rs, ss))| aggregate_one(pair, &rs, &ss))
        .collect()
}
