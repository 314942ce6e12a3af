#![allow(dead_code)]

pub mod codebleu_oracle;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use reasontrans::corpus::{load_parallel_functions, ParallelFunction, SourceProgram};
use reasontrans::gateway::MockEntry;
use reasontrans::sandbox::{ExecLimits, Executor, Toolchains};
use reasontrans::synthesis::RejectionStage;
use reasontrans::{LanguageId, LanguagePair};
use serde::Deserialize;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn corpus() -> Vec<ParallelFunction> {
    load_parallel_functions(&fixtures_dir().join("corpus.jsonl")).expect("fixture corpus")
}

#[derive(Debug, Deserialize)]
pub struct Mutant {
    pub code: BTreeMap<String, String>,
    pub failing: Vec<String>,
}

pub fn mutants() -> BTreeMap<String, Mutant> {
    let text = std::fs::read_to_string(fixtures_dir().join("mutants.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn mutant_code(m: &Mutant, lang: LanguageId) -> &str {
    &m.code[match lang {
        LanguageId::Python => "py",
        LanguageId::Java => "java",
        LanguageId::Cpp => "cpp",
    }]
}

pub fn executor() -> Executor {
    Executor::new(Toolchains::default(), ExecLimits::default())
}

/// Languages whose toolchain is installed; prints a note for the rest.
pub fn available_languages() -> Vec<LanguageId> {
    let tc = Toolchains::default();
    LanguageId::ALL
        .into_iter()
        .filter(|&lang| match tc.require(lang) {
            Ok(()) => true,
            Err(e) => {
                eprintln!("skipping {lang}: {e}");
                false
            }
        })
        .collect()
}

/// Matches prompts for `code` written in `source`, whatever the template.
pub fn prompt_regex(source: LanguageId, code: &str) -> String {
    format!("(?s){}.*{}", regex::escape(source.display_name()), regex::escape(code))
}

pub fn fenced(lang: LanguageId, code: &str) -> String {
    format!("```{}\n{}```\n", lang.fence_labels()[0], code)
}

/// Ten synthesis inputs: every Java and every C++ fixture function.
pub fn synthesis_programs() -> Vec<SourceProgram> {
    let corpus = corpus();
    [LanguageId::Java, LanguageId::Cpp]
        .into_iter()
        .flat_map(|lang| corpus.iter().map(move |f| f.program(lang).unwrap()))
        .collect()
}

pub struct ScriptedProgram {
    pub id: String,
    pub expected: Option<RejectionStage>,
}

/// Mock script over [`synthesis_programs`] translating into Python: seven
/// correct answers, one prose answer, one syntax error and one answer that
/// fails some cases (the count_even off-by-one).
pub fn synthesis_script() -> (Vec<MockEntry>, Vec<ScriptedProgram>) {
    let corpus = corpus();
    let mutants = mutants();
    let mut entries = Vec::new();
    let mut plan = Vec::new();
    for program in synthesis_programs() {
        let function = corpus.iter().find(|f| program.id.starts_with(&format!("{}:", f.id))).unwrap();
        let gold = function.code(LanguageId::Python).unwrap();
        let (response, expected) = match (program.language, function.id.as_str()) {
            (LanguageId::Cpp, "FIX_is_prime") => (
                "The function checks divisors up to the square root and returns whether none divide n.".to_string(),
                Some(RejectionStage::SyntaxFailed),
            ),
            (LanguageId::Cpp, "FIX_reverse") => (
                format!("Loop backwards.\n{}", fenced(LanguageId::Python, "def f_gold(s:\n    return s[::-1]\n")),
                Some(RejectionStage::SyntaxFailed),
            ),
            (LanguageId::Cpp, "FIX_count_even") => (
                format!("Count evens.\n{}", fenced(LanguageId::Python, mutant_code(&mutants["FIX_count_even"], LanguageId::Python))),
                Some(RejectionStage::TestsFailed),
            ),
            _ => (
                format!(
                    "The {} function maps directly onto Python; keep the name and the loop structure.\n{}",
                    program.language.display_name(),
                    fenced(LanguageId::Python, gold)
                ),
                None,
            ),
        };
        entries.push(MockEntry {
            prompt_regex: Some(prompt_regex(program.language, &program.code)),
            response,
            tokens: Some(100 + entries.len() as u64 * 10),
            ..MockEntry::default()
        });
        plan.push(ScriptedProgram { id: program.id.clone(), expected });
    }
    (entries, plan)
}

pub fn python_pairs() -> Vec<LanguagePair> {
    vec![
        LanguagePair::new(LanguageId::Java, LanguageId::Python).unwrap(),
        LanguagePair::new(LanguageId::Cpp, LanguageId::Python).unwrap(),
    ]
}

pub const TESTGEN_CUE: &str = "unit test inputs";
pub const TRANSLATE_CUE: &str = "must pass these test cases";
pub const REPAIR_CUE: &str = "Execution feedback:";

/// Three generated cases for the digit-sum function; the last contradicts the gold code.
pub fn digit_sum_testgen() -> MockEntry {
    MockEntry {
        prompt_contains: Some(TESTGEN_CUE.into()),
        response: "```json\n{\"args\": [12], \"expected\": 3}\n{\"args\": [40], \"expected\": 4}\n{\"args\": [5], \"expected\": 6}\n```\n".into(),
        tokens: Some(30),
        ..MockEntry::default()
    }
}

pub fn digit_sum_program(source: LanguageId) -> SourceProgram {
    corpus().iter().find(|f| f.id == "FIX_sum_digits").unwrap().program(source).unwrap()
}

/// Mock for the agent loop on the digit-sum function translated into Python.
/// `wrong_rounds` answers (translation first, then repairs) are the
/// off-by-one mutant; later answers are the gold translation.
pub fn agent_script(wrong_rounds: usize) -> Vec<MockEntry> {
    let corpus = corpus();
    let function = corpus.iter().find(|f| f.id == "FIX_sum_digits").unwrap();
    let gold = function.code(LanguageId::Python).unwrap().to_string();
    let wrong = mutant_code(&mutants()["FIX_sum_digits"], LanguageId::Python).to_string();
    let mut entries = vec![digit_sum_testgen()];
    let answer = |k: usize| {
        let code = if k < wrong_rounds { &wrong } else { &gold };
        format!("Attempt {k}.\n{}", fenced(LanguageId::Python, code))
    };
    entries.push(MockEntry {
        prompt_contains: Some(TRANSLATE_CUE.into()),
        response: answer(0),
        tokens: Some(200),
        delay_ms: 5,
        ..MockEntry::default()
    });
    for k in 1..=4 {
        entries.push(MockEntry {
            prompt_contains: Some(REPAIR_CUE.into()),
            response: answer(k),
            tokens: Some(200 + 17 * k as u64),
            delay_ms: 5,
            times: Some(1),
            ..MockEntry::default()
        });
    }
    entries
}

/// Pairs whose target toolchain is installed.
pub fn runnable_pairs() -> Vec<LanguagePair> {
    let langs = available_languages();
    LanguagePair::all()
        .into_iter()
        .filter(|p| langs.contains(&p.source) && langs.contains(&p.target))
        .collect()
}

/// Matches the SFT-style prompt for `code` translated along `pair`.
pub fn sft_entry(pair: LanguagePair, code: &str, response: String) -> MockEntry {
    MockEntry {
        prompt_contains: Some(code.to_string()),
        prompt_regex: Some(regex::escape(&format!(
            "Translate the above {} code into {} code",
            pair.source.display_name(),
            pair.target.display_name()
        ))),
        response,
        ..MockEntry::default()
    }
}

/// A mock that answers every SFT-style prompt with the reference translation.
pub fn identity_script(pairs: &[LanguagePair]) -> Vec<MockEntry> {
    let mut entries = Vec::new();
    for function in corpus() {
        for &pair in pairs {
            let (Some(src), Some(tgt)) = (function.code(pair.source), function.code(pair.target)) else { continue };
            let response = format!("Problem analysis: same algorithm.\nFinal Answer:\n{}", fenced(pair.target, tgt));
            let mut entry = sft_entry(pair, src, response);
            entry.tokens = Some(50 + tgt.len() as u64);
            entries.push(entry);
        }
    }
    entries
}
