//! Test-guided translation agent: generate a few test cases, translate with
//! them in the prompt, then repair from execution feedback for a bounded
//! number of rounds.
//!
//! `max_rounds` counts repairs only, so a trace holds at most
//! `max_rounds + 1` rounds. Every round is scored against the full
//! ground-truth suite; the generated tests only appear in the prompt.
//! Test-generation tokens and latency are reported separately from the
//! round totals.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::{ParallelFunction, SourceProgram, TestCase};
use crate::error::{Error, Result};
use crate::gateway::{EndpointConfig, Gateway, GenerationResult};
use crate::lang::{LanguageId, LanguagePair};
use crate::metrics::EvalRecord;
use crate::prompt_kit::{
    fenced_blocks, parse_completion, render_agent_repair_prompt, render_agent_translate_prompt, render_testgen_prompt,
    TemplateId,
};
use crate::sandbox::{CaseStatus, ExecLimits, Executor, TestReport};

fn default_tests() -> usize {
    3
}
fn default_rounds() -> u32 {
    2
}
fn yes() -> bool {
    true
}
fn default_workers() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    #[serde(default = "default_tests")]
    pub n_generated_tests: usize,
    /// Repair rounds after the initial translation.
    #[serde(default = "default_rounds")]
    pub max_rounds: u32,
    #[serde(default)]
    pub limits: ExecLimits,
    pub endpoint: EndpointConfig,
    /// Drop generated tests that the gold source disagrees with.
    #[serde(default = "yes")]
    pub filter_generated_tests: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl AgentConfig {
    pub fn new(endpoint: EndpointConfig) -> Self {
        Self {
            n_generated_tests: default_tests(),
            max_rounds: default_rounds(),
            limits: ExecLimits::default(),
            endpoint,
            filter_generated_tests: true,
            workers: default_workers(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_generated_tests == 0 {
            return Err(Error::Invalid("n_generated_tests must be positive".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::Invalid("max_rounds must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Invalid("workers must be positive".into()));
        }
        self.limits.validate()?;
        self.endpoint.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRound {
    pub prompt_kind: TemplateId,
    pub completion: String,
    pub code: String,
    pub report: TestReport,
    pub generated_tokens: u64,
    pub latency_s: f64,
    #[serde(default)]
    pub tokens_estimated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TraceStatus {
    /// Stopped on an all-pass report or after the last repair round.
    Completed,
    /// The endpoint failed; the trace ends at the last completed round.
    EndpointFailed { message: String },
    /// No usable test cases; no translation was attempted.
    TestgenFailed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTrace {
    pub sample_id: String,
    pub pair: LanguagePair,
    pub generated_tests: Vec<TestCase>,
    pub testgen_tokens: u64,
    pub testgen_latency_s: f64,
    pub rounds: Vec<AgentRound>,
    pub final_code: String,
    pub final_report: TestReport,
    /// Sum over rounds.
    pub total_tokens: u64,
    /// Sum over rounds.
    pub total_latency_s: f64,
    pub status: TraceStatus,
}

impl AgentTrace {
    pub fn tokens_estimated(&self) -> bool {
        self.rounds.iter().any(|r| r.tokens_estimated)
    }
}

/// JSON values in a test-generation completion: the first JSON block (or
/// the whole text), read as a stream of values; arrays are flattened.
fn candidate_values(raw: &str) -> Vec<Value> {
    let blocks = fenced_blocks(raw);
    let body = blocks
        .iter()
        .find(|b| b.label == "json")
        .or_else(|| blocks.first())
        .map(|b| &raw[b.body.clone()])
        .unwrap_or(raw);
    let mut out = Vec::new();
    for value in serde_json::Deserializer::from_str(body.trim()).into_iter::<Value>() {
        match value {
            Ok(Value::Array(items)) => out.extend(items),
            Ok(v) => out.push(v),
            Err(_) => break,
        }
    }
    out
}

/// Parses up to `n` cases shaped `{"args": [...], "expected": v}` with the suite's arity.
pub fn parse_test_cases(raw: &str, arity: usize, n: usize) -> Vec<TestCase> {
    candidate_values(raw)
        .into_iter()
        .filter_map(|v| {
            let args = v.get("args")?.as_array()?.clone();
            let expected = v.get("expected")?.clone();
            (args.len() == arity).then_some((args, expected))
        })
        .take(n)
        .enumerate()
        .map(|(i, (args, expected))| TestCase {
            case_id: format!("g{i}"),
            args,
            expected,
        })
        .collect()
}

/// Asks the endpoint for `n` cases, drops unparseable ones and, when
/// `filter` is set, the ones the gold source does not reproduce.
pub fn generate_test_cases(
    gateway: &Gateway,
    executor: &Executor,
    program: &SourceProgram,
    target: LanguageId,
    n: usize,
    filter: bool,
) -> Result<(Vec<TestCase>, GenerationResult)> {
    let arity = program.suite.cases.first().map_or(0, |c| c.args.len());
    let prompt = render_testgen_prompt(&program.code, program.language, target, &program.suite.entry_function, n)?;
    let generation = gateway.generate(&prompt)?;
    let mut cases = parse_test_cases(&generation.text, arity, n);
    if filter && !cases.is_empty() {
        let suite = program.suite.with_cases(cases.clone());
        let report = executor.evaluate(&program.code, &suite, program.language);
        cases.retain(|c| {
            report
                .case_results
                .iter()
                .any(|r| r.case_id == c.case_id && r.status == CaseStatus::Pass)
        });
    }
    if cases.is_empty() {
        return Err(Error::Invalid(format!("no usable generated test cases for {}", program.id)));
    }
    Ok((cases, generation))
}

fn round(
    gateway: &Gateway,
    executor: &Executor,
    program: &SourceProgram,
    target: LanguageId,
    prompt: crate::prompt_kit::RenderedPrompt,
) -> Result<AgentRound> {
    let generation = gateway.generate(&prompt)?;
    let parsed = parse_completion(&generation.text, target);
    let report = executor.evaluate(&parsed.code, &program.suite, target);
    Ok(AgentRound {
        prompt_kind: prompt.template_id,
        completion: generation.text,
        code: parsed.code,
        report,
        generated_tokens: generation.generated_tokens,
        latency_s: generation.latency_s,
        tokens_estimated: generation.tokens_estimated,
    })
}

fn finish(
    program: &SourceProgram,
    pair: LanguagePair,
    tests: Vec<TestCase>,
    testgen: Option<&GenerationResult>,
    rounds: Vec<AgentRound>,
    status: TraceStatus,
) -> AgentTrace {
    let (final_code, final_report) = match rounds.last() {
        Some(r) => (r.code.clone(), r.report.clone()),
        None => (String::new(), TestReport::not_compiled(program.suite.len(), "no translation was produced")),
    };
    AgentTrace {
        sample_id: program.id.clone(),
        pair,
        generated_tests: tests,
        testgen_tokens: testgen.map_or(0, |g| g.generated_tokens),
        testgen_latency_s: testgen.map_or(0.0, |g| g.latency_s),
        total_tokens: rounds.iter().map(|r| r.generated_tokens).sum(),
        total_latency_s: rounds.iter().map(|r| r.latency_s).sum(),
        rounds,
        final_code,
        final_report,
        status,
    }
}

/// Runs one episode with already generated tests.
pub fn run_agent_with_tests(
    gateway: &Gateway,
    executor: &Executor,
    program: &SourceProgram,
    target: LanguageId,
    tests: Vec<TestCase>,
    testgen: Option<&GenerationResult>,
    max_rounds: u32,
) -> Result<AgentTrace> {
    let pair = LanguagePair::new(program.language, target)?;
    let prompt = render_agent_translate_prompt(&program.code, program.language, target, &program.suite.entry_function, &tests)?;
    let mut rounds = Vec::new();
    let mut status = TraceStatus::Completed;
    match round(gateway, executor, program, target, prompt) {
        Ok(r) => rounds.push(r),
        Err(e) => status = TraceStatus::EndpointFailed { message: e.to_string() },
    }
    let mut repairs = 0;
    while status == TraceStatus::Completed && repairs < max_rounds {
        let last = rounds.last().expect("initial round present");
        if last.report.all_passed() {
            break;
        }
        repairs += 1;
        let prompt = render_agent_repair_prompt(&program.code, &last.code, &last.report, program.language, target)?;
        match round(gateway, executor, program, target, prompt) {
            Ok(r) => rounds.push(r),
            Err(e) => status = TraceStatus::EndpointFailed { message: e.to_string() },
        }
    }
    Ok(finish(program, pair, tests, testgen, rounds, status))
}

/// Test generation followed by the translate/repair loop.
pub fn run_agent(
    gateway: &Gateway,
    executor: &Executor,
    program: &SourceProgram,
    target: LanguageId,
    config: &AgentConfig,
) -> Result<AgentTrace> {
    let (tests, testgen) = generate_test_cases(
        gateway,
        executor,
        program,
        target,
        config.n_generated_tests,
        config.filter_generated_tests,
    )?;
    run_agent_with_tests(gateway, executor, program, target, tests, Some(&testgen), config.max_rounds)
}

/// Runs the agent over a parallel dataset for one pair. Samples whose test
/// generation fails get a trace with no rounds instead of aborting the batch.
pub fn run_agents(
    functions: &[ParallelFunction],
    pair: LanguagePair,
    config: &AgentConfig,
    gateway: &Gateway,
    executor: &Executor,
) -> Result<Vec<AgentTrace>> {
    config.validate()?;
    executor.toolchains().require(pair.target)?;
    let programs: Vec<SourceProgram> = functions
        .iter()
        .filter(|f| f.code(pair.target).is_some())
        .filter_map(|f| f.program(pair.source))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Invalid(format!("agent worker pool: {e}")))?;
    use rayon::prelude::*;
    pool.install(|| {
        programs
            .par_iter()
            .map(|program| match run_agent(gateway, executor, program, pair.target, config) {
                Ok(trace) => Ok(trace),
                Err(e @ (Error::Invalid(_) | Error::Gateway(_))) => {
                    let message = e.to_string();
                    tracing::warn!(sample = %program.id, %message, "test generation failed");
                    Ok(finish(program, pair, Vec::new(), None, Vec::new(), TraceStatus::TestgenFailed { message }))
                }
                Err(e) => Err(e),
            })
            .collect()
    })
}

/// Evaluation records for traces, with the target implementation as reference.
pub fn trace_records(traces: &[AgentTrace], functions: &[ParallelFunction]) -> Result<Vec<EvalRecord>> {
    traces
        .iter()
        .map(|t| {
            let function = functions
                .iter()
                .find(|f| f.program(t.pair.source).is_some_and(|p| p.id == t.sample_id))
                .ok_or_else(|| Error::Invalid(format!("trace for unknown sample {:?}", t.sample_id)))?;
            let reference = function
                .code(t.pair.target)
                .ok_or_else(|| Error::Invalid(format!("{} has no {} reference", function.id, t.pair.target)))?;
            Ok(EvalRecord {
                sample_id: t.sample_id.clone(),
                pair: t.pair,
                generated_tokens: t.total_tokens,
                latency_s: t.total_latency_s,
                report: t.final_report.clone(),
                hypothesis_code: t.final_code.clone(),
                reference_code: reference.to_string(),
                tokens_estimated: t.tokens_estimated(),
            })
        })
        .collect()
}
