//! Compile-and-run sandbox for Python, Java and C++ candidates.
//!
//! Each run gets a fresh temporary directory, its own process group and
//! wall-clock plus per-case deadlines. Drivers report results on stdout with
//! the line grammar
//!
//! ```text
//! REASONTRANS CASE <case_id> PASS|FAIL|ERROR[ <detail>]
//! ```
//!
//! preceded by `REASONTRANS BEGIN <case_id>` when a case starts. Any other
//! output is treated as candidate noise. A case that exceeds its deadline is
//! marked `timeout` and the driver is restarted on the remaining cases, so a
//! single runaway case never poisons its siblings.
//!
//! Value comparison is structural over JSON: numbers compare numerically
//! (booleans count as 0/1), sequences element-wise, and float-tolerant suites
//! accept a relative (or, near zero, absolute) difference up to epsilon.

mod driver;
mod process;

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::TestSuite;
use crate::error::{Error, Result};
use crate::lang::LanguageId;

pub use driver::{prepare_test_script, TestScript};
pub(crate) use driver::{java_unit, CPP_PRELUDE};

use process::{Event, LineStream};

const MAX_DIAGNOSTIC_BYTES: usize = 8 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecLimits {
    /// Budget for the whole run phase of one script.
    pub wall_timeout_s: f64,
    pub per_case_timeout_s: f64,
    /// Budget for the compile step, which is not counted against the wall budget.
    pub compile_timeout_s: f64,
    pub max_output_bytes: usize,
}

impl Default for ExecLimits {
    fn default() -> Self {
        Self {
            wall_timeout_s: 10.0,
            per_case_timeout_s: 5.0,
            compile_timeout_s: 60.0,
            max_output_bytes: 1 << 20,
        }
    }
}

impl ExecLimits {
    pub fn validate(&self) -> Result<()> {
        if !(self.wall_timeout_s > 0.0 && self.per_case_timeout_s > 0.0 && self.compile_timeout_s > 0.0) {
            return Err(Error::Invalid("execution timeouts must be positive".into()));
        }
        if self.per_case_timeout_s > self.wall_timeout_s {
            return Err(Error::Invalid(format!(
                "per_case_timeout_s ({}) exceeds wall_timeout_s ({})",
                self.per_case_timeout_s, self.wall_timeout_s
            )));
        }
        if self.max_output_bytes == 0 {
            return Err(Error::Invalid("max_output_bytes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseStatus {
    Pass,
    Fail,
    Error,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_id: String,
    pub status: CaseStatus,
    #[serde(default)]
    pub detail: String,
}

/// Outcome of running one candidate against one suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestReport {
    pub compiled: bool,
    pub total: usize,
    pub passed: usize,
    #[serde(default)]
    pub case_results: Vec<CaseResult>,
    #[serde(default)]
    pub diagnostics: String,
}

impl TestReport {
    /// A report for code that never got to run. Counts every case as failed.
    pub fn not_compiled(total: usize, diagnostics: impl Into<String>) -> Self {
        Self {
            compiled: false,
            total,
            passed: 0,
            case_results: Vec::new(),
            diagnostics: process::truncate(&diagnostics.into(), MAX_DIAGNOSTIC_BYTES),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.compiled && self.total > 0 && self.passed == self.total
    }

    /// passed/total for compiled reports, 0 otherwise.
    pub fn pass_fraction(&self) -> f64 {
        if !self.compiled || self.total == 0 {
            0.0
        } else {
            self.passed as f64 / self.total as f64
        }
    }

    pub fn failing_case_ids(&self) -> Vec<&str> {
        self.case_results
            .iter()
            .filter(|c| c.status != CaseStatus::Pass)
            .map(|c| c.case_id.as_str())
            .collect()
    }

    pub fn has_failures(&self) -> bool {
        !self.all_passed()
    }
}

/// Commands used to build and run candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Toolchains {
    pub python: String,
    pub cxx: String,
    pub cxx_flags: Vec<String>,
    pub javac: String,
    pub java: String,
    pub java_flags: Vec<String>,
}

impl Default for Toolchains {
    /// System tools, overridable through `REASONTRANS_PYTHON`,
    /// `REASONTRANS_CXX`, `REASONTRANS_JAVAC` and `REASONTRANS_JAVA`.
    fn default() -> Self {
        let env = |key: &str, default: &str| std::env::var(key).unwrap_or_else(|_| default.to_string());
        Self {
            python: env("REASONTRANS_PYTHON", "python3"),
            cxx: env("REASONTRANS_CXX", "g++"),
            cxx_flags: vec!["-std=c++17".into(), "-O1".into()],
            javac: env("REASONTRANS_JAVAC", "javac"),
            java: env("REASONTRANS_JAVA", "java"),
            java_flags: vec!["-XX:-UsePerfData".into(), "-Xss64m".into()],
        }
    }
}

impl Toolchains {
    fn tools(&self, language: LanguageId) -> Vec<&str> {
        match language {
            LanguageId::Python => vec![&self.python],
            LanguageId::Cpp => vec![&self.cxx],
            LanguageId::Java => vec![&self.javac, &self.java],
        }
    }

    /// Fails with an environment error naming the first missing tool.
    pub fn require(&self, language: LanguageId) -> Result<()> {
        for tool in self.tools(language) {
            if process::resolve_program(tool).is_none() {
                return Err(Error::Toolchain {
                    tool: tool.to_string(),
                    message: format!("not found on PATH (needed for {language})"),
                });
            }
        }
        Ok(())
    }

    pub fn available(&self, language: LanguageId) -> bool {
        self.require(language).is_ok()
    }

    pub(crate) fn python_compile_command(&self, file: &str) -> Vec<String> {
        vec![
            self.python.clone(),
            "-B".into(),
            "-c".into(),
            "import sys; compile(open(sys.argv[1], encoding='utf-8').read(), sys.argv[1], 'exec')".into(),
            file.into(),
        ]
    }

    pub(crate) fn python_run_command(&self, file: &str) -> Vec<String> {
        vec![self.python.clone(), "-B".into(), "-I".into(), file.into()]
    }

    pub(crate) fn cxx_compile_command(&self, source: &str, output: &str) -> Vec<String> {
        let mut argv = vec![self.cxx.clone()];
        argv.extend(self.cxx_flags.iter().cloned());
        argv.extend(["-o".into(), output.into(), source.into()]);
        argv
    }

    pub(crate) fn cxx_syntax_command(&self, source: &str) -> Vec<String> {
        let mut argv = vec![self.cxx.clone()];
        argv.extend(self.cxx_flags.iter().cloned());
        argv.extend(["-fsyntax-only".into(), source.into()]);
        argv
    }

    pub(crate) fn javac_command(&self, files: &[&str]) -> Vec<String> {
        let mut argv = vec![
            self.javac.clone(),
            "-encoding".into(),
            "UTF-8".into(),
            "-nowarn".into(),
            "-d".into(),
            ".".into(),
        ];
        argv.extend(files.iter().map(|f| f.to_string()));
        argv
    }

    pub(crate) fn java_run_command(&self, class: &str) -> Vec<String> {
        let mut argv = vec![self.java.clone()];
        argv.extend(self.java_flags.iter().cloned());
        argv.extend(["-cp".into(), ".".into(), class.into()]);
        argv
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SyntaxCheck {
    Ok,
    Failed { diagnostics: String },
}

impl SyntaxCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, SyntaxCheck::Ok)
    }
}

static VERDICT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^REASONTRANS CASE (\S+) (PASS|FAIL|ERROR)( .*)?$").unwrap());
const BEGIN_PREFIX: &str = "REASONTRANS BEGIN ";

/// Parses one driver verdict line.
pub fn parse_verdict(line: &str) -> Option<(String, CaseStatus, String)> {
    let caps = VERDICT.captures(line)?;
    let status = match &caps[2] {
        "PASS" => CaseStatus::Pass,
        "FAIL" => CaseStatus::Fail,
        _ => CaseStatus::Error,
    };
    let detail = caps.get(3).map(|m| m.as_str().trim().to_string()).unwrap_or_default();
    Some((caps[1].to_string(), status, detail))
}

fn scratch_dir(root: Option<&Path>) -> std::io::Result<tempfile::TempDir> {
    let mut builder = tempfile::Builder::new();
    builder.prefix("reasontrans-");
    match root {
        Some(root) => builder.tempdir_in(root),
        None => builder.tempdir(),
    }
}

/// Checks that `code` is syntactically valid: byte-compilation for Python,
/// a compile-only invocation for Java and C++.
pub fn syntax_check(
    code: &str,
    language: LanguageId,
    toolchains: &Toolchains,
    limits: &ExecLimits,
) -> Result<SyntaxCheck> {
    toolchains.require(language)?;
    let dir = scratch_dir(None).map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let write = |name: &str, text: &str| {
        let path = dir.path().join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    };
    let argv = match language {
        LanguageId::Python => {
            write("candidate.py", code)?;
            toolchains.python_compile_command("candidate.py")
        }
        LanguageId::Cpp => {
            write("candidate.cpp", code)?;
            write("check.cpp", &format!("{CPP_PRELUDE}#include \"candidate.cpp\"\n"))?;
            toolchains.cxx_syntax_command("check.cpp")
        }
        LanguageId::Java => {
            let unit = java_unit(code);
            write(&unit.file_name, &unit.source)?;
            toolchains.javac_command(&[unit.file_name.as_str()])
        }
    };
    let finished = process::run_to_completion(
        &argv,
        dir.path(),
        Duration::from_secs_f64(limits.compile_timeout_s),
        limits.max_output_bytes,
    )?;
    if finished.success() {
        Ok(SyntaxCheck::Ok)
    } else {
        let mut diagnostics = finished.combined_output();
        if finished.timed_out {
            diagnostics.push_str("\nsyntax check timed out");
        }
        Ok(SyntaxCheck::Failed {
            diagnostics: process::truncate(&diagnostics, MAX_DIAGNOSTIC_BYTES),
        })
    }
}

/// Compiles and runs a prepared script. Never fails: every failure mode is
/// encoded in the returned report.
pub fn run_test_script(script: &TestScript, limits: &ExecLimits, scratch_root: Option<&Path>) -> TestReport {
    let total = script.case_ids.len();
    let dir = match scratch_dir(scratch_root) {
        Ok(dir) => dir,
        Err(e) => return TestReport::not_compiled(total, format!("cannot create workdir: {e}")),
    };
    for (name, content) in &script.files {
        if let Err(e) = fs::write(dir.path().join(name), content) {
            return TestReport::not_compiled(total, format!("cannot write {name}: {e}"));
        }
    }

    let mut diagnostics = String::new();
    if let Some(compile) = &script.compile_command {
        let finished = match process::run_to_completion(
            compile,
            dir.path(),
            Duration::from_secs_f64(limits.compile_timeout_s),
            limits.max_output_bytes,
        ) {
            Ok(f) => f,
            Err(e) => return TestReport::not_compiled(total, e.to_string()),
        };
        if !finished.success() {
            let mut text = finished.combined_output();
            if finished.timed_out {
                text.push_str("\ncompilation timed out");
            }
            return TestReport::not_compiled(total, text);
        }
        diagnostics.push_str(finished.stderr.trim());
    }

    let outcome = supervise(script, dir.path(), limits);
    if !outcome.stderr.trim().is_empty() {
        if !diagnostics.is_empty() {
            diagnostics.push('\n');
        }
        diagnostics.push_str(outcome.stderr.trim());
    }
    let case_results: Vec<CaseResult> = script
        .case_ids
        .iter()
        .enumerate()
        .map(|(idx, id)| {
            outcome.results.get(&idx).cloned().unwrap_or_else(|| CaseResult {
                case_id: id.clone(),
                status: CaseStatus::Error,
                detail: "no verdict produced".into(),
            })
        })
        .collect();
    let passed = case_results.iter().filter(|c| c.status == CaseStatus::Pass).count();
    TestReport {
        compiled: true,
        total,
        passed,
        case_results,
        diagnostics: process::truncate(&diagnostics, MAX_DIAGNOSTIC_BYTES),
    }
}

struct Supervised {
    results: HashMap<usize, CaseResult>,
    stderr: String,
}

enum StreamEnd {
    Deadline,
    OutputLimit,
    Exited,
}

/// Runs the driver, restarting it on the remaining cases after a per-case
/// timeout or a crash.
fn supervise(script: &TestScript, workdir: &Path, limits: &ExecLimits) -> Supervised {
    let index_of: HashMap<&str, usize> = script
        .case_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut results: HashMap<usize, CaseResult> = HashMap::new();
    let mut pending: BTreeSet<usize> = (0..script.case_ids.len()).collect();
    let mut stderr_log = String::new();
    let per_case = Duration::from_secs_f64(limits.per_case_timeout_s);
    let wall_deadline = Instant::now() + Duration::from_secs_f64(limits.wall_timeout_s);

    let settle = |results: &mut HashMap<usize, CaseResult>,
                      pending: &mut BTreeSet<usize>,
                      idx: usize,
                      status: CaseStatus,
                      detail: String| {
        if pending.remove(&idx) {
            results.insert(
                idx,
                CaseResult {
                    case_id: script.case_ids[idx].clone(),
                    status,
                    detail,
                },
            );
            true
        } else {
            false
        }
    };

    while !pending.is_empty() {
        if Instant::now() >= wall_deadline {
            for idx in pending.clone() {
                settle(&mut results, &mut pending, idx, CaseStatus::Timeout, "wall-clock limit exceeded".into());
            }
            break;
        }
        let mut argv = script.entry_command.clone();
        argv.extend(pending.iter().map(|i| i.to_string()));
        let mut stream = match LineStream::start(&argv, workdir, limits.max_output_bytes) {
            Ok(stream) => stream,
            Err(e) => {
                for idx in pending.clone() {
                    settle(&mut results, &mut pending, idx, CaseStatus::Error, e.to_string());
                }
                break;
            }
        };
        let mut current: Option<(usize, Instant)> = None;
        let mut progressed = false;
        let mut output_bytes = 0usize;
        let end = loop {
            let now = Instant::now();
            let deadline = match current {
                Some((_, started)) => wall_deadline.min(started + per_case),
                None => wall_deadline,
            };
            if now >= deadline {
                break StreamEnd::Deadline;
            }
            match stream.next(deadline - now) {
                Ok(Event::Line(line)) => {
                    output_bytes += line.len() + 1;
                    if let Some((id, status, detail)) = parse_verdict(&line) {
                        if let Some(&idx) = index_of.get(id.as_str()) {
                            progressed |= settle(&mut results, &mut pending, idx, status, detail);
                            if current.is_some_and(|(c, _)| c == idx) {
                                current = None;
                            }
                        }
                    } else if let Some(id) = line.strip_prefix(BEGIN_PREFIX) {
                        if let Some(&idx) = index_of.get(id.trim()) {
                            current = Some((idx, Instant::now()));
                        }
                    }
                    if output_bytes > limits.max_output_bytes {
                        break StreamEnd::OutputLimit;
                    }
                }
                Ok(Event::Eof) => break StreamEnd::Exited,
                Err(std::sync::mpsc::RecvTimeoutError::Timeout) => continue,
                Err(std::sync::mpsc::RecvTimeoutError::Disconnected) => break StreamEnd::Exited,
            }
        };
        match end {
            StreamEnd::Deadline => {
                stream.kill();
                let (_, stderr) = stream.finish();
                append_log(&mut stderr_log, &stderr);
                if Instant::now() >= wall_deadline {
                    for idx in pending.clone() {
                        settle(&mut results, &mut pending, idx, CaseStatus::Timeout, "wall-clock limit exceeded".into());
                    }
                    break;
                }
                if let Some((idx, _)) = current {
                    settle(
                        &mut results,
                        &mut pending,
                        idx,
                        CaseStatus::Timeout,
                        format!("exceeded per-case limit of {}s", limits.per_case_timeout_s),
                    );
                }
            }
            StreamEnd::OutputLimit => {
                stream.kill();
                let (_, stderr) = stream.finish();
                append_log(&mut stderr_log, &stderr);
                let victim = current.map(|(i, _)| i).or_else(|| pending.iter().next().copied());
                if let Some(idx) = victim {
                    settle(&mut results, &mut pending, idx, CaseStatus::Error, "output limit exceeded".into());
                }
            }
            StreamEnd::Exited => {
                let (status, stderr) = stream.finish();
                let tail = process::truncate(stderr.trim(), 512);
                append_log(&mut stderr_log, &stderr);
                let exit = status.map(|s| s.to_string()).unwrap_or_else(|| "unknown status".into());
                if let Some((idx, _)) = current {
                    settle(
                        &mut results,
                        &mut pending,
                        idx,
                        CaseStatus::Error,
                        format!("process terminated ({exit}) {tail}").trim().to_string(),
                    );
                } else if !progressed {
                    for idx in pending.clone() {
                        settle(
                            &mut results,
                            &mut pending,
                            idx,
                            CaseStatus::Error,
                            format!("driver exited without a verdict ({exit}) {tail}").trim().to_string(),
                        );
                    }
                }
            }
        }
    }
    Supervised {
        results,
        stderr: stderr_log,
    }
}

fn append_log(log: &mut String, text: &str) {
    let text = text.trim();
    if text.is_empty() || log.len() > MAX_DIAGNOSTIC_BYTES {
        return;
    }
    if !log.is_empty() {
        log.push('\n');
    }
    log.push_str(text);
}

/// One unit of sandbox work.
#[derive(Debug, Clone)]
pub struct Job<'a> {
    pub code: &'a str,
    pub suite: &'a TestSuite,
    pub language: LanguageId,
}

/// Shared entry point to the sandbox with a bounded worker pool.
pub struct Executor {
    toolchains: Toolchains,
    limits: ExecLimits,
    scratch_root: Option<PathBuf>,
    pool: rayon::ThreadPool,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("toolchains", &self.toolchains)
            .field("limits", &self.limits)
            .field("workers", &self.pool.current_num_threads())
            .finish()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::new(Toolchains::default(), ExecLimits::default())
    }
}

impl Executor {
    pub fn new(toolchains: Toolchains, limits: ExecLimits) -> Self {
        Self::with_workers(toolchains, limits, 0)
    }

    /// `workers == 0` means one worker per CPU.
    pub fn with_workers(toolchains: Toolchains, limits: ExecLimits, workers: usize) -> Self {
        let workers = if workers == 0 {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        } else {
            workers
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("sandbox-{i}"))
            .build()
            .expect("sandbox worker pool");
        Self {
            toolchains,
            limits,
            scratch_root: None,
            pool,
        }
    }

    /// Creates per-run workdirs under `root` instead of the system temp dir.
    pub fn with_scratch_root(mut self, root: impl Into<PathBuf>) -> Self {
        self.scratch_root = Some(root.into());
        self
    }

    pub fn toolchains(&self) -> &Toolchains {
        &self.toolchains
    }

    pub fn limits(&self) -> &ExecLimits {
        &self.limits
    }

    pub fn syntax_check(&self, code: &str, language: LanguageId) -> Result<SyntaxCheck> {
        syntax_check(code, language, &self.toolchains, &self.limits)
    }

    pub fn prepare(&self, code: &str, suite: &TestSuite, language: LanguageId) -> Result<TestScript> {
        prepare_test_script(code, suite, language, &self.toolchains)
    }

    pub fn run(&self, script: &TestScript) -> TestReport {
        self.run_with_limits(script, &self.limits)
    }

    pub fn run_with_limits(&self, script: &TestScript, limits: &ExecLimits) -> TestReport {
        if let Err(e) = self.toolchains.require(script.language) {
            return TestReport::not_compiled(script.case_ids.len(), e.to_string());
        }
        run_test_script(script, limits, self.scratch_root.as_deref())
    }

    /// Prepares and runs in one step; preparation errors become a
    /// non-compiled report.
    pub fn evaluate(&self, code: &str, suite: &TestSuite, language: LanguageId) -> TestReport {
        self.evaluate_with_limits(code, suite, language, &self.limits)
    }

    pub fn evaluate_with_limits(
        &self,
        code: &str,
        suite: &TestSuite,
        language: LanguageId,
        limits: &ExecLimits,
    ) -> TestReport {
        match self.prepare(code, suite, language) {
            Ok(script) => self.run_with_limits(&script, limits),
            Err(e) => TestReport::not_compiled(suite.len(), e.to_string()),
        }
    }

    /// Evaluates jobs on the worker pool, preserving input order.
    pub fn evaluate_batch(&self, jobs: &[Job<'_>]) -> Vec<TestReport> {
        self.pool.install(|| {
            jobs.par_iter()
                .map(|job| self.evaluate(job.code, job.suite, job.language))
                .collect()
        })
    }

    /// Runs `f` over `items` on the worker pool, preserving input order.
    pub fn map_parallel<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        self.pool.install(|| items.par_iter().map(f).collect())
    }
}
