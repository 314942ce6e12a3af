//! Source programs, test suites and reasoning triplets.
//!
//! Everything is persisted as JSON Lines (UTF-8, one record per line). Field
//! names are part of the on-disk contract:
//!
//! - `programs.jsonl`: `id`, `language`, `code`, `suite`, `origin`
//! - `parallel.jsonl`: `id`, `implementations` (language → code), `suite`, `origin`
//! - `triplets.jsonl`: every [`ReasoningTriplet`] field
//! - `exclusions.json`: a JSON array of program ids

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::lang::{LanguageId, LanguagePair};
use crate::sandbox::TestReport;

/// Default relative epsilon for float-tolerant suites.
pub const DEFAULT_FLOAT_EPSILON: f64 = 1e-6;

/// One structured test case: positional arguments and the expected return value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub case_id: String,
    pub args: Vec<Value>,
    pub expected: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EqualityMode {
    #[default]
    Exact,
    FloatTolerant {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
}

fn default_epsilon() -> f64 {
    DEFAULT_FLOAT_EPSILON
}

impl EqualityMode {
    pub fn epsilon(&self) -> Option<f64> {
        match self {
            EqualityMode::Exact => None,
            EqualityMode::FloatTolerant { epsilon } => Some(*epsilon),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSuite {
    pub entry_function: String,
    pub cases: Vec<TestCase>,
    #[serde(default)]
    pub equality_mode: EqualityMode,
}

impl TestSuite {
    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    /// Checks the suite invariants: non-empty, unique case ids, fixed arity.
    pub fn validate(&self) -> Result<()> {
        if self.entry_function.trim().is_empty() {
            return Err(Error::Invalid("suite entry_function is empty".into()));
        }
        if self.cases.is_empty() {
            return Err(Error::Invalid(format!(
                "suite for `{}` has no cases",
                self.entry_function
            )));
        }
        let mut seen = BTreeSet::new();
        let arity = self.cases[0].args.len();
        for case in &self.cases {
            if case.case_id.is_empty() || case.case_id.chars().any(char::is_whitespace) {
                return Err(Error::Invalid(format!(
                    "case id {:?} must be non-empty and contain no whitespace",
                    case.case_id
                )));
            }
            if !seen.insert(case.case_id.as_str()) {
                return Err(Error::Invalid(format!("duplicate case id {:?}", case.case_id)));
            }
            if case.args.len() != arity {
                return Err(Error::Invalid(format!(
                    "case {:?} has {} args, expected {arity}",
                    case.case_id,
                    case.args.len()
                )));
            }
        }
        Ok(())
    }

    /// A copy of the suite restricted to the given cases.
    pub fn with_cases(&self, cases: Vec<TestCase>) -> TestSuite {
        TestSuite {
            entry_function: self.entry_function.clone(),
            cases,
            equality_mode: self.equality_mode,
        }
    }
}

/// A gold function in one language together with its test suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceProgram {
    pub id: String,
    pub language: LanguageId,
    pub code: String,
    pub suite: TestSuite,
    #[serde(default)]
    pub origin: String,
    /// Line coverage of the suite over the gold code, when the upstream corpus
    /// supplies it. Recorded only; the harness never measures coverage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
}

/// One function implemented in several languages, sharing one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelFunction {
    pub id: String,
    pub implementations: BTreeMap<LanguageId, String>,
    pub suite: TestSuite,
    #[serde(default)]
    pub origin: String,
}

impl ParallelFunction {
    pub fn code(&self, language: LanguageId) -> Option<&str> {
        self.implementations.get(&language).map(String::as_str)
    }

    /// The single-language view of this function, if implemented in `language`.
    pub fn program(&self, language: LanguageId) -> Option<SourceProgram> {
        self.code(language).map(|code| SourceProgram {
            id: format!("{}:{}", self.id, language.slug()),
            language,
            code: code.to_string(),
            suite: self.suite.clone(),
            origin: self.origin.clone(),
            coverage: None,
        })
    }
}

/// A validated (source, reasoning, target) training record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningTriplet {
    pub source_id: String,
    pub source_language: LanguageId,
    pub target_language: LanguageId,
    pub source_code: String,
    pub reasoning: String,
    pub target_code: String,
    pub validation: TestReport,
    pub token_count: u64,
}

impl ReasoningTriplet {
    pub fn pair(&self) -> LanguagePair {
        LanguagePair {
            source: self.source_language,
            target: self.target_language,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub pair: LanguagePair,
    pub samples: usize,
    pub avg_tokens: f64,
}

/// Per-pair and overall sample counts with mean token counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub pairs: Vec<PairStats>,
    pub overall_samples: usize,
    pub overall_avg_tokens: f64,
}

impl DatasetStats {
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Translation Pair | # Samples | # Avg. Tokens |\n|---|---|---|\n");
        for row in &self.pairs {
            out.push_str(&format!(
                "| {} | {} | {:.2} |\n",
                row.pair, row.samples, row.avg_tokens
            ));
        }
        out.push_str(&format!(
            "| Overall | {} | {:.2} |\n",
            self.overall_samples, self.overall_avg_tokens
        ));
        out
    }
}

pub fn corpus_stats(triplets: &[ReasoningTriplet]) -> DatasetStats {
    let mut groups: BTreeMap<LanguagePair, (usize, u64)> = BTreeMap::new();
    for t in triplets {
        let entry = groups.entry(t.pair()).or_default();
        entry.0 += 1;
        entry.1 += t.token_count;
    }
    let pairs: Vec<PairStats> = groups
        .into_iter()
        .map(|(pair, (n, sum))| PairStats {
            pair,
            samples: n,
            avg_tokens: sum as f64 / n as f64,
        })
        .collect();
    let overall_samples: usize = pairs.iter().map(|p| p.samples).sum();
    let total_tokens: u64 = triplets.iter().map(|t| t.token_count).sum();
    let overall_avg_tokens = if overall_samples == 0 {
        0.0
    } else {
        total_tokens as f64 / overall_samples as f64
    };
    DatasetStats {
        pairs,
        overall_samples,
        overall_avg_tokens,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_cases: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { min_cases: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    TestSetLeakage,
    TooFewCases,
    GoldCompileFailure,
    GoldTestFailure,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::TestSetLeakage => "test-set-leakage",
            RejectReason::TooFewCases => "too-few-cases",
            RejectReason::GoldCompileFailure => "gold-compile-failure",
            RejectReason::GoldTestFailure => "gold-test-failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejected {
    pub id: String,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    pub kept: Vec<SourceProgram>,
    pub rejected: Vec<Rejected>,
}

/// Partitions `programs` into kept and rejected.
///
/// Overlap with the evaluation set is detected by id only.
pub fn filter_corpus(
    programs: &[SourceProgram],
    gold_reports: &HashMap<String, TestReport>,
    exclusion_ids: &BTreeSet<String>,
    config: FilterConfig,
) -> Result<FilterOutcome> {
    let mut outcome = FilterOutcome::default();
    for program in programs {
        let report = gold_reports
            .get(&program.id)
            .ok_or_else(|| Error::MissingGoldReport(program.id.clone()))?;
        let reason = if exclusion_ids.contains(&program.id) {
            Some(RejectReason::TestSetLeakage)
        } else if program.suite.len() < config.min_cases {
            Some(RejectReason::TooFewCases)
        } else if !report.compiled {
            Some(RejectReason::GoldCompileFailure)
        } else if !report.all_passed() {
            Some(RejectReason::GoldTestFailure)
        } else {
            None
        };
        match reason {
            Some(reason) => outcome.rejected.push(Rejected {
                id: program.id.clone(),
                reason,
            }),
            None => outcome.kept.push(program.clone()),
        }
    }
    Ok(outcome)
}

static MISSING_FIELD: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"missing field `([^`]+)`").unwrap());
static UNKNOWN_VARIANT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"unknown variant `([^`]+)`").unwrap());

fn decode_record<T: DeserializeOwned>(line: &str) -> std::result::Result<T, (String, String)> {
    let de = &mut serde_json::Deserializer::from_str(line);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        let message = inner.to_string();
        let field = if let Some(c) = MISSING_FIELD.captures(&message) {
            if path == "." {
                c[1].to_string()
            } else {
                format!("{path}.{}", &c[1])
            }
        } else if UNKNOWN_VARIANT.is_match(&message) || path != "." {
            path
        } else {
            String::new()
        };
        (field, message)
    })
}

/// Reads a JSON Lines file. Blank lines are skipped; line numbers are 1-based.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        match decode_record::<T>(&line) {
            Ok(record) => records.push((lineno, record)),
            Err((field, message)) if !field.is_empty() => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    message: Error::Schema { field, message }.to_string(),
                })
            }
            Err((_, message)) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    message,
                })
            }
        }
    }
    Ok(records)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Appends one record to a JSONL file, creating it if needed.
pub fn append_jsonl<T: Serialize>(path: &Path, record: &T) -> Result<()> {
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut line = serde_json::to_vec(record)?;
    line.push(b'\n');
    file.write_all(&line).map_err(|e| Error::io(path, e))
}

pub fn load_source_programs(path: &Path) -> Result<Vec<SourceProgram>> {
    let records: Vec<(usize, SourceProgram)> = read_jsonl(path)?;
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut programs = Vec::with_capacity(records.len());
    for (line, program) in records {
        if let Some(&first) = seen.get(&program.id) {
            return Err(Error::DuplicateId {
                id: program.id,
                first,
                second: line,
            });
        }
        check_program(&program).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        seen.insert(program.id.clone(), line);
        programs.push(program);
    }
    Ok(programs)
}

fn check_program(program: &SourceProgram) -> Result<()> {
    if program.id.trim().is_empty() {
        return Err(Error::Schema {
            field: "id".into(),
            message: "must be non-empty".into(),
        });
    }
    if program.code.trim().is_empty() {
        return Err(Error::Schema {
            field: "code".into(),
            message: "must be non-empty".into(),
        });
    }
    program.suite.validate()
}

pub fn load_parallel_functions(path: &Path) -> Result<Vec<ParallelFunction>> {
    let records: Vec<(usize, ParallelFunction)> = read_jsonl(path)?;
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::with_capacity(records.len());
    for (line, function) in records {
        if let Some(&first) = seen.get(&function.id) {
            return Err(Error::DuplicateId {
                id: function.id,
                first,
                second: line,
            });
        }
        function.suite.validate().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        seen.insert(function.id.clone(), line);
        out.push(function);
    }
    Ok(out)
}

/// Loads either a `programs.jsonl` manifest or a parallel-function file; the
/// latter is flattened into one program per implemented language.
pub fn load_programs_any(path: &Path) -> Result<Vec<SourceProgram>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let first = text.lines().find(|l| !l.trim().is_empty());
    let parallel = first
        .and_then(|l| serde_json::from_str::<Value>(l).ok())
        .is_some_and(|v| v.get("implementations").is_some());
    if !parallel {
        return load_source_programs(path);
    }
    let functions = load_parallel_functions(path)?;
    Ok(LanguageId::ALL
        .iter()
        .flat_map(|&lang| functions.iter().filter_map(move |f| f.program(lang)))
        .collect())
}

pub fn write_source_programs(path: &Path, programs: &[SourceProgram]) -> Result<()> {
    write_jsonl(path, programs)
}

pub fn write_triplets(path: &Path, triplets: &[ReasoningTriplet]) -> Result<()> {
    write_jsonl(path, triplets)
}

pub fn load_triplets(path: &Path) -> Result<Vec<ReasoningTriplet>> {
    let records: Vec<(usize, ReasoningTriplet)> = read_jsonl(path)?;
    Ok(records.into_iter().map(|(_, t)| t).collect())
}

pub fn load_exclusions(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ids: Vec<String> = serde_json::from_str(&text)?;
    Ok(ids.into_iter().collect())
}
