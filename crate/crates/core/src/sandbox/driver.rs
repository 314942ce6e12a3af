//! Test-script generation: wraps candidate code and emits a per-language
//! driver with one invocation per test case.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::TestSuite;
use crate::error::{Error, Result};
use crate::lang::LanguageId;

use super::Toolchains;

const PYTHON_DRIVER: &str = include_str!("../../templates/driver/python_driver.py");
const CPP_DRIVER: &str = include_str!("../../templates/driver/cpp_driver.cpp");
const JAVA_DRIVER: &str = include_str!("../../templates/driver/ReasontransDriver.java");

pub(crate) const JAVA_DRIVER_CLASS: &str = "ReasontransDriver";
pub(crate) const JAVA_WRAPPER_CLASS: &str = "Solution";

/// Java imports made available to wrapped method-only candidates.
pub(crate) const JAVA_IMPORTS: &str =
    "import java.util.*;\nimport java.util.stream.*;\nimport java.lang.*;\nimport java.io.*;\n";

/// Headers in scope for C++ candidates, matching competitive-programming style sources.
pub(crate) const CPP_PRELUDE: &str = "#include <bits/stdc++.h>\nusing namespace std;\n";

/// Files plus the commands that compile and run them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestScript {
    pub language: LanguageId,
    pub files: BTreeMap<String, String>,
    /// Compile step, if the language has one. Runs in the script's workdir.
    pub compile_command: Option<Vec<String>>,
    /// Run step. Case indices to execute are appended as extra arguments.
    pub entry_command: Vec<String>,
    /// Case ids in suite order; position is the index passed to the driver.
    pub case_ids: Vec<String>,
}

static JAVA_CLASS_DECL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?m)^\s*(?:(?:public|private|protected|abstract|final|static|strictfp)\s+)*(?:class|interface|enum|record)\s+([A-Za-z_$][A-Za-z0-9_$]*)").unwrap()
});
static JAVA_PUBLIC_CLASS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?m)^\s*public\s+(?:(?:abstract|final|strictfp)\s+)*(?:class|interface|enum|record)\s+([A-Za-z_$][A-Za-z0-9_$]*)").unwrap()
});
static JAVA_IMPORT_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*import\s+[\w.*\s]+;\s*$").unwrap());

/// A Java candidate laid out as compilable source.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct JavaUnit {
    pub file_name: String,
    pub source: String,
    pub classes: Vec<String>,
}

/// Candidates that declare no type are wrapped in a `Solution` class; leading
/// import lines are kept above the wrapper.
pub(crate) fn java_unit(code: &str) -> JavaUnit {
    let classes: Vec<String> = JAVA_CLASS_DECL
        .captures_iter(code)
        .map(|c| c[1].to_string())
        .collect();
    if classes.is_empty() {
        let mut imports = String::new();
        let mut body = String::new();
        let mut in_header = true;
        for line in code.lines() {
            if in_header && (JAVA_IMPORT_LINE.is_match(line) || line.trim().is_empty()) {
                if !line.trim().is_empty() {
                    imports.push_str(line.trim());
                    imports.push('\n');
                }
                continue;
            }
            in_header = false;
            body.push_str(line);
            body.push('\n');
        }
        let source = format!(
            "{JAVA_IMPORTS}{imports}\nclass {JAVA_WRAPPER_CLASS} {{\n{body}}}\n"
        );
        return JavaUnit {
            file_name: format!("{JAVA_WRAPPER_CLASS}.java"),
            source,
            classes: vec![JAVA_WRAPPER_CLASS.to_string()],
        };
    }
    let file_stem = JAVA_PUBLIC_CLASS
        .captures(code)
        .map(|c| c[1].to_string())
        .unwrap_or_else(|| "Candidate".to_string());
    let has_imports = code.lines().any(|l| JAVA_IMPORT_LINE.is_match(l));
    let source = if has_imports || code.trim_start().starts_with("package") {
        code.to_string()
    } else {
        format!("{JAVA_IMPORTS}\n{code}")
    };
    JavaUnit {
        file_name: format!("{file_stem}.java"),
        source,
        classes,
    }
}

fn json_literal(value: &serde_json::Value) -> String {
    // A JSON string literal is also a valid Python, Java and C++ string literal
    // for the escapes serde_json emits.
    serde_json::to_string(&value.to_string()).expect("string serialization is infallible")
}

fn string_literal(text: &str) -> String {
    serde_json::to_string(text).expect("string serialization is infallible")
}

fn epsilon_literal(suite: &TestSuite) -> (bool, String) {
    match suite.equality_mode.epsilon() {
        Some(eps) => (true, format!("{eps:e}")),
        None => (false, "0.0".to_string()),
    }
}

fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (key, value) in values {
        out = out.replace(&format!("{{{{{key}}}}}"), value);
    }
    out
}

/// Builds the files and commands that check `code` against `suite`.
///
/// An entry function missing from `code` is not detected here; it surfaces
/// as per-case errors at run time.
pub fn prepare_test_script(
    code: &str,
    suite: &TestSuite,
    language: LanguageId,
    toolchains: &Toolchains,
) -> Result<TestScript> {
    if code.trim().is_empty() {
        return Err(Error::Invalid("candidate code is empty".into()));
    }
    suite.validate()?;
    let case_ids: Vec<String> = suite.cases.iter().map(|c| c.case_id.clone()).collect();
    let (tolerant, epsilon) = epsilon_literal(suite);
    let mut files = BTreeMap::new();
    let script = match language {
        LanguageId::Python => {
            let calls: Vec<String> = suite
                .cases
                .iter()
                .enumerate()
                .map(|(i, case)| {
                    format!(
                        "_run_case({i}, {}, {}, {})",
                        string_literal(&case.case_id),
                        json_literal(&serde_json::Value::Array(case.args.clone())),
                        json_literal(&case.expected)
                    )
                })
                .collect();
            let driver = fill(
                PYTHON_DRIVER,
                &[
                    ("entry_function", &suite.entry_function),
                    ("epsilon", if tolerant { &epsilon } else { "None" }),
                    ("cases", &calls.join("\n")),
                ],
            );
            files.insert("candidate.py".to_string(), code.to_string());
            files.insert("driver.py".to_string(), driver);
            TestScript {
                language,
                files,
                compile_command: Some(toolchains.python_compile_command("candidate.py")),
                entry_command: toolchains.python_run_command("driver.py"),
                case_ids,
            }
        }
        LanguageId::Cpp => {
            let calls: Vec<String> = suite
                .cases
                .iter()
                .enumerate()
                .map(|(i, case)| {
                    format!(
                        "    reasontrans::run_case({i}, {}, {}, {}, &{});",
                        string_literal(&case.case_id),
                        json_literal(&serde_json::Value::Array(case.args.clone())),
                        json_literal(&case.expected),
                        suite.entry_function
                    )
                })
                .collect();
            let driver = fill(
                CPP_DRIVER,
                &[
                    ("tolerant", if tolerant { "true" } else { "false" }),
                    ("epsilon", &epsilon),
                    ("cases", &calls.join("\n")),
                ],
            );
            files.insert("candidate.cpp".to_string(), code.to_string());
            files.insert("driver.cpp".to_string(), driver);
            TestScript {
                language,
                files,
                compile_command: Some(toolchains.cxx_compile_command("driver.cpp", "driver")),
                entry_command: vec!["./driver".to_string()],
                case_ids,
            }
        }
        LanguageId::Java => {
            let unit = java_unit(code);
            let calls: Vec<String> = suite
                .cases
                .iter()
                .enumerate()
                .map(|(i, case)| {
                    format!(
                        "        runCase({i}, {}, {}, {});",
                        string_literal(&case.case_id),
                        json_literal(&serde_json::Value::Array(case.args.clone())),
                        json_literal(&case.expected)
                    )
                })
                .collect();
            let classes: Vec<String> = unit.classes.iter().map(|c| string_literal(c)).collect();
            let driver = fill(
                JAVA_DRIVER,
                &[
                    ("entry_function", &suite.entry_function),
                    ("candidate_classes", &classes.join(", ")),
                    ("tolerant", if tolerant { "true" } else { "false" }),
                    ("epsilon", &epsilon),
                    ("cases", &calls.join("\n")),
                ],
            );
            let driver_file = format!("{JAVA_DRIVER_CLASS}.java");
            let compile = toolchains.javac_command(&[unit.file_name.as_str(), driver_file.as_str()]);
            files.insert(unit.file_name, unit.source);
            files.insert(driver_file, driver);
            TestScript {
                language,
                files,
                compile_command: Some(compile),
                entry_command: toolchains.java_run_command(JAVA_DRIVER_CLASS),
                case_ids,
            }
        }
    };
    Ok(script)
}
