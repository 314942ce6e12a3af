//! Triplet synthesis: prompt → generate → parse → syntax check → full suite.
//!
//! Work items are (program, pair, attempt) keys, where a pair applies to the
//! programs written in its source language. Items run on a bounded pool of
//! generation workers; a single writer appends results to the output
//! directory in work order, so files are deterministic for a deterministic
//! endpoint and the checkpoint is always a prefix of the work list.
//!
//! Output directory layout:
//!
//! - `triplets.jsonl`, `rejections.jsonl`: append-only results
//! - `checkpoint.jsonl`: a header with the config hash, then one completed key per line
//! - `stats.json`: per-pair counts and mean token counts of all triplets

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{self, corpus_stats, DatasetStats, ReasoningTriplet, SourceProgram};
use crate::error::{Error, Result};
use crate::gateway::{EndpointConfig, Gateway};
use crate::lang::LanguagePair;
use crate::prompt_kit::{parse_completion, render_synthesis_prompt};
use crate::sandbox::{ExecLimits, Executor, SyntaxCheck};

pub const TRIPLETS_FILE: &str = "triplets.jsonl";
pub const REJECTIONS_FILE: &str = "rejections.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.jsonl";
pub const STATS_FILE: &str = "stats.json";

fn one() -> u32 {
    1
}

fn default_workers() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub pairs: Vec<LanguagePair>,
    #[serde(default = "one")]
    pub attempts_per_sample: u32,
    #[serde(default)]
    pub limits: ExecLimits,
    pub endpoint: EndpointConfig,
    /// Output directory; the CLI's `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    /// Concurrent generation requests.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl SynthesisConfig {
    pub fn new(pairs: Vec<LanguagePair>, endpoint: EndpointConfig) -> Self {
        Self {
            pairs,
            attempts_per_sample: 1,
            limits: ExecLimits::default(),
            endpoint,
            output_path: None,
            workers: default_workers(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::Invalid("synthesis config lists no language pairs".into()));
        }
        if let Some(p) = self.pairs.iter().find(|p| !p.is_valid()) {
            return Err(Error::SameLanguage(p.source));
        }
        if self.attempts_per_sample == 0 {
            return Err(Error::Invalid("attempts_per_sample must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Invalid("workers must be positive".into()));
        }
        self.limits.validate()?;
        self.endpoint.validate()?;
        Ok(())
    }

    /// Hash of everything that affects results. Output location and worker
    /// count are excluded, and so is the API key.
    pub fn config_hash(&self) -> String {
        let identity = serde_json::json!({
            "pairs": self.pairs,
            "attempts_per_sample": self.attempts_per_sample,
            "limits": self.limits,
            "base_url": self.endpoint.base_url,
            "model_name": self.endpoint.model_name,
            "max_new_tokens": self.endpoint.max_new_tokens,
            "temperature": self.endpoint.temperature,
        });
        hex::encode(Sha256::digest(identity.to_string().as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionStage {
    GenerationFailed,
    ParseFailed,
    SyntaxFailed,
    TestsFailed,
}

impl RejectionStage {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectionStage::GenerationFailed => "generation_failed",
            RejectionStage::ParseFailed => "parse_failed",
            RejectionStage::SyntaxFailed => "syntax_failed",
            RejectionStage::TestsFailed => "tests_failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRecord {
    pub source_id: String,
    pub pair: LanguagePair,
    #[serde(default)]
    pub attempt: u32,
    pub stage: RejectionStage,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorkKey {
    pub source_id: String,
    pub pair: LanguagePair,
    pub attempt: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Accepted(ReasoningTriplet),
    Rejected(RejectionRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CheckpointHeader {
    config_hash: String,
}

/// Everything in the output directory after a run, plus what this run did.
#[derive(Debug, Clone)]
pub struct SynthesisOutput {
    pub triplets: Vec<ReasoningTriplet>,
    pub rejections: Vec<RejectionRecord>,
    pub stats: DatasetStats,
    pub processed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Stop after this many new items, leaving a resumable checkpoint.
    pub max_items: Option<usize>,
}

/// (program index, pair, attempt) in deterministic order.
pub fn work_items(programs: &[SourceProgram], config: &SynthesisConfig) -> Vec<(usize, WorkKey)> {
    let mut items = Vec::new();
    for (i, program) in programs.iter().enumerate() {
        for pair in config.pairs.iter().filter(|p| p.source == program.language) {
            for attempt in 0..config.attempts_per_sample {
                items.push((
                    i,
                    WorkKey {
                        source_id: program.id.clone(),
                        pair: *pair,
                        attempt,
                    },
                ));
            }
        }
    }
    items
}

/// Runs every gate for one item. Never fails: each problem becomes a rejection.
pub fn synthesize_one(gateway: &Gateway, executor: &Executor, program: &SourceProgram, key: &WorkKey) -> Outcome {
    let reject = |stage: RejectionStage, detail: String| {
        Outcome::Rejected(RejectionRecord {
            source_id: key.source_id.clone(),
            pair: key.pair,
            attempt: key.attempt,
            stage,
            detail,
        })
    };
    let target = key.pair.target;
    let prompt = match render_synthesis_prompt(&program.code, key.pair.source, target) {
        Ok(p) => p,
        Err(e) => return reject(RejectionStage::GenerationFailed, e.to_string()),
    };
    let generation = match gateway.generate(&prompt) {
        Ok(g) => g,
        Err(e) => return reject(RejectionStage::GenerationFailed, e.to_string()),
    };
    if generation.text.trim().is_empty() {
        return reject(RejectionStage::ParseFailed, "empty completion".into());
    }
    let parsed = parse_completion(&generation.text, target);
    if parsed.code.trim().is_empty() {
        return reject(RejectionStage::ParseFailed, "no code in completion".into());
    }
    match executor.syntax_check(&parsed.code, target) {
        Ok(SyntaxCheck::Ok) => {}
        Ok(SyntaxCheck::Failed { diagnostics }) => return reject(RejectionStage::SyntaxFailed, diagnostics),
        Err(e) => return reject(RejectionStage::SyntaxFailed, e.to_string()),
    }
    let report = executor.evaluate(&parsed.code, &program.suite, target);
    if !report.all_passed() {
        let detail = if report.compiled {
            format!("passed {}/{}; failing: {}", report.passed, report.total, report.failing_case_ids().join(", "))
        } else {
            format!("did not compile: {}", report.diagnostics)
        };
        return reject(RejectionStage::TestsFailed, detail);
    }
    Outcome::Accepted(ReasoningTriplet {
        source_id: program.id.clone(),
        source_language: key.pair.source,
        target_language: target,
        source_code: program.code.clone(),
        reasoning: parsed.reasoning,
        target_code: parsed.code,
        validation: report,
        token_count: generation.generated_tokens,
    })
}

/// Reads the checkpoint, failing when it was written under another config.
fn read_checkpoint(path: &Path, expected_hash: &str) -> Result<HashSet<WorkKey>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let Some(first) = lines.next() else {
        return Ok(HashSet::new());
    };
    let header: CheckpointHeader = serde_json::from_str(first)?;
    if header.config_hash != expected_hash {
        return Err(Error::ConfigMismatch {
            expected: expected_hash.to_string(),
            found: header.config_hash,
        });
    }
    lines.map(|l| Ok(serde_json::from_str(l)?)).collect()
}

fn load_outputs(out_dir: &Path) -> Result<(Vec<ReasoningTriplet>, Vec<RejectionRecord>)> {
    let triplets_path = out_dir.join(TRIPLETS_FILE);
    let rejections_path = out_dir.join(REJECTIONS_FILE);
    let triplets = if triplets_path.exists() { corpus::load_triplets(&triplets_path)? } else { Vec::new() };
    let rejections = if rejections_path.exists() {
        corpus::read_jsonl(&rejections_path)?.into_iter().map(|(_, r)| r).collect()
    } else {
        Vec::new()
    };
    Ok((triplets, rejections))
}

pub fn synthesize_dataset(programs: &[SourceProgram], config: &SynthesisConfig, out_dir: &Path) -> Result<SynthesisOutput> {
    let gateway = Gateway::new(config.endpoint.clone())?;
    let executor = Executor::new(Default::default(), config.limits);
    run(programs, config, out_dir, &gateway, &executor, RunOptions::default())
}

/// Continues a previous run in `out_dir`; the checkpoint must exist.
pub fn resume(checkpoint_path: &Path, programs: &[SourceProgram], config: &SynthesisConfig) -> Result<SynthesisOutput> {
    if !checkpoint_path.exists() {
        return Err(Error::Invalid(format!("no checkpoint at {}", checkpoint_path.display())));
    }
    let out_dir = checkpoint_path.parent().unwrap_or(Path::new("."));
    synthesize_dataset(programs, config, out_dir)
}

/// The pipeline with caller-supplied gateway and executor.
///
/// An existing checkpoint in `out_dir` is resumed; completed keys are skipped
/// and the returned output covers the union of all runs.
pub fn run(
    programs: &[SourceProgram],
    config: &SynthesisConfig,
    out_dir: &Path,
    gateway: &Gateway,
    executor: &Executor,
    options: RunOptions,
) -> Result<SynthesisOutput> {
    config.validate()?;
    for pair in &config.pairs {
        executor.toolchains().require(pair.target)?;
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let hash = config.config_hash();
    let checkpoint = out_dir.join(CHECKPOINT_FILE);
    let done = if checkpoint.exists() {
        read_checkpoint(&checkpoint, &hash)?
    } else {
        corpus::append_jsonl(&checkpoint, &CheckpointHeader { config_hash: hash.clone() })?;
        HashSet::new()
    };

    let all = work_items(programs, config);
    let mut pending: Vec<&(usize, WorkKey)> = all.iter().filter(|(_, k)| !done.contains(k)).collect();
    let skipped = all.len() - pending.len();
    if let Some(max) = options.max_items {
        pending.truncate(max);
    }
    tracing::info!(total = all.len(), skipped, pending = pending.len(), "synthesis started");

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Outcome)>();
    let workers = config.workers.min(pending.len()).max(1);
    let write_result: Result<()> = std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, pending) = (&next, &pending);
            scope.spawn(move || loop {
                let slot = next.fetch_add(1, Ordering::SeqCst);
                let Some((program_idx, key)) = pending.get(slot) else { break };
                let outcome = synthesize_one(gateway, executor, &programs[*program_idx], key);
                if tx.send((slot, outcome)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // Single writer, in work order.
        let mut buffered: BTreeMap<usize, Outcome> = BTreeMap::new();
        let mut cursor = 0;
        for (slot, outcome) in rx {
            buffered.insert(slot, outcome);
            while let Some(outcome) = buffered.remove(&cursor) {
                let key = &pending[cursor].1;
                match &outcome {
                    Outcome::Accepted(t) => {
                        tracing::info!(source_id = %key.source_id, pair = %key.pair, "accepted");
                        corpus::append_jsonl(&out_dir.join(TRIPLETS_FILE), t)?;
                    }
                    Outcome::Rejected(r) => {
                        tracing::info!(source_id = %key.source_id, pair = %key.pair, stage = r.stage.as_str(), "rejected");
                        corpus::append_jsonl(&out_dir.join(REJECTIONS_FILE), r)?;
                    }
                }
                corpus::append_jsonl(&checkpoint, key)?;
                cursor += 1;
            }
        }
        Ok(())
    });
    write_result?;

    let (triplets, rejections) = load_outputs(out_dir)?;
    let stats = corpus_stats(&triplets);
    let stats_path = out_dir.join(STATS_FILE);
    fs::write(&stats_path, serde_json::to_string_pretty(&stats)? + "\n").map_err(|e| Error::io(&stats_path, e))?;
    Ok(SynthesisOutput {
        triplets,
        rejections,
        stats,
        processed: pending.len(),
        skipped,
    })
}

/// Re-executes every triplet's target code against its program's suite.
pub fn revalidate(triplets: &[ReasoningTriplet], programs: &[SourceProgram], executor: &Executor) -> Result<Vec<bool>> {
    let by_id: BTreeMap<&str, &SourceProgram> = programs.iter().map(|p| (p.id.as_str(), p)).collect();
    let jobs = triplets
        .iter()
        .map(|t| {
            by_id
                .get(t.source_id.as_str())
                .map(|p| (t, *p))
                .ok_or_else(|| Error::Invalid(format!("triplet for unknown program {:?}", t.source_id)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(executor.map_parallel(&jobs, |(t, p)| executor.evaluate(&t.target_code, &p.suite, t.target_language).all_passed()))
}
