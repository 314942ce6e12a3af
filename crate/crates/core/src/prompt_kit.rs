//! Prompt templates and completion parsing.
//!
//! Templates live under `templates/prompts/<version>/` and use `{{name}}`
//! placeholders. Substitution is a single pass over the template, so text
//! inside substituted values (source code containing `{{x}}`, say) is never
//! expanded again.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::TestCase;
use crate::error::{Error, Result};
use crate::lang::{LanguageId, LanguagePair};
use crate::sandbox::{CaseStatus, TestReport};

pub const TEMPLATE_VERSION: &str = "v1";

/// Literal answer cue of the fine-tuning prompt.
pub const ANSWER_CUE: &str = "Final Answer:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    Synthesis,
    SftStyle,
    AgentTranslate,
    AgentRepair,
    Testgen,
}

impl TemplateId {
    pub const ALL: [TemplateId; 5] = [
        TemplateId::Synthesis,
        TemplateId::SftStyle,
        TemplateId::AgentTranslate,
        TemplateId::AgentRepair,
        TemplateId::Testgen,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::Synthesis => "synthesis",
            TemplateId::SftStyle => "sft_style",
            TemplateId::AgentTranslate => "agent_translate",
            TemplateId::AgentRepair => "agent_repair",
            TemplateId::Testgen => "testgen",
        }
    }

    /// Raw template text for the current version.
    pub fn template(self) -> &'static str {
        match self {
            TemplateId::Synthesis => include_str!("../templates/prompts/v1/synthesis.txt"),
            TemplateId::SftStyle => include_str!("../templates/prompts/v1/sft_style.txt"),
            TemplateId::AgentTranslate => include_str!("../templates/prompts/v1/agent_translate.txt"),
            TemplateId::AgentRepair => include_str!("../templates/prompts/v1/agent_repair.txt"),
            TemplateId::Testgen => include_str!("../templates/prompts/v1/testgen.txt"),
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub template_id: TemplateId,
    pub source_language: LanguageId,
    pub target_language: LanguageId,
}

static PLACEHOLDER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{\{([a-z_]+)\}\}").unwrap());

/// Names of the placeholders a template uses, in order of first appearance.
pub fn placeholders(template: &str) -> Vec<String> {
    let mut seen = Vec::new();
    for caps in PLACEHOLDER.captures_iter(template) {
        let name = caps[1].to_string();
        if !seen.contains(&name) {
            seen.push(name);
        }
    }
    seen
}

/// Fills every placeholder in one pass. Unknown placeholders are an error.
pub fn fill(template: &str, values: &BTreeMap<&str, String>) -> Result<String> {
    let mut out = String::with_capacity(template.len() + 256);
    let mut last = 0;
    for caps in PLACEHOLDER.captures_iter(template) {
        let whole = caps.get(0).unwrap();
        let name = &caps[1];
        let value = values
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("template placeholder {{{{{name}}}}} has no value")))?;
        out.push_str(&template[last..whole.start()]);
        out.push_str(value);
        last = whole.end();
    }
    out.push_str(&template[last..]);
    Ok(out)
}

fn base_values(code: &str, src: LanguageId, tgt: LanguageId) -> Result<BTreeMap<&'static str, String>> {
    LanguagePair::new(src, tgt)?;
    if code.trim().is_empty() {
        return Err(Error::Invalid("source code is empty".into()));
    }
    let mut values = BTreeMap::new();
    values.insert("source_code", code.trim_end_matches('\n').to_string());
    values.insert("src_lang", src.display_name().to_string());
    values.insert("tgt_lang", tgt.display_name().to_string());
    values.insert("src_fence", src.fence_labels()[0].to_string());
    values.insert("tgt_fence", tgt.fence_labels()[0].to_string());
    Ok(values)
}

fn render(
    id: TemplateId,
    values: &BTreeMap<&str, String>,
    src: LanguageId,
    tgt: LanguageId,
) -> Result<RenderedPrompt> {
    Ok(RenderedPrompt {
        text: fill(id.template(), values)?,
        template_id: id,
        source_language: src,
        target_language: tgt,
    })
}

/// Instruction prompt used to ask a reasoning model for (reasoning, code).
pub fn render_synthesis_prompt(code: &str, src: LanguageId, tgt: LanguageId) -> Result<RenderedPrompt> {
    let values = base_values(code, src, tgt)?;
    render(TemplateId::Synthesis, &values, src, tgt)
}

/// Task prompt, analysis cue and answer cue, in that order.
pub fn render_sft_style_prompt(code: &str, src: LanguageId, tgt: LanguageId) -> Result<RenderedPrompt> {
    let values = base_values(code, src, tgt)?;
    render(TemplateId::SftStyle, &values, src, tgt)
}

/// One line per case: `- c0: f(1, [2, 3]) returns 4`.
pub fn format_tests(entry_function: &str, tests: &[TestCase]) -> String {
    tests
        .iter()
        .map(|case| {
            let args: Vec<String> = case.args.iter().map(|a| a.to_string()).collect();
            format!(
                "- {}: {}({}) returns {}",
                case.case_id,
                entry_function,
                args.join(", "),
                case.expected
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn render_agent_translate_prompt(
    code: &str,
    src: LanguageId,
    tgt: LanguageId,
    entry_function: &str,
    tests: &[TestCase],
) -> Result<RenderedPrompt> {
    if tests.is_empty() {
        return Err(Error::Invalid("agent translation prompt needs at least one test case".into()));
    }
    let mut values = base_values(code, src, tgt)?;
    values.insert("tests", format_tests(entry_function, tests));
    render(TemplateId::AgentTranslate, &values, src, tgt)
}

fn describe_failures(report: &TestReport) -> String {
    if !report.compiled {
        return "The translation failed to compile, so no test case could run.".into();
    }
    let mut lines = vec![format!("{} of {} test cases passed.", report.passed, report.total)];
    for case in &report.case_results {
        let status = match case.status {
            CaseStatus::Pass => continue,
            CaseStatus::Fail => "wrong result",
            CaseStatus::Error => "runtime error",
            CaseStatus::Timeout => "timed out",
        };
        if case.detail.is_empty() {
            lines.push(format!("- {}: {status}", case.case_id));
        } else {
            lines.push(format!("- {}: {status}: {}", case.case_id, case.detail));
        }
    }
    lines.join("\n")
}

pub fn render_agent_repair_prompt(
    code: &str,
    prev_code: &str,
    report: &TestReport,
    src: LanguageId,
    tgt: LanguageId,
) -> Result<RenderedPrompt> {
    if report.all_passed() {
        return Err(Error::Invalid("every test passed; there is nothing to repair".into()));
    }
    let mut values = base_values(code, src, tgt)?;
    values.insert("prev_code", prev_code.trim_end_matches('\n').to_string());
    values.insert("failures", describe_failures(report));
    let diagnostics = report.diagnostics.trim();
    values.insert(
        "diagnostics",
        if diagnostics.is_empty() { "(none)".to_string() } else { diagnostics.to_string() },
    );
    render(TemplateId::AgentRepair, &values, src, tgt)
}

/// Asks for `n_tests` JSON test cases for the source function.
pub fn render_testgen_prompt(
    code: &str,
    src: LanguageId,
    tgt: LanguageId,
    entry_function: &str,
    n_tests: usize,
) -> Result<RenderedPrompt> {
    if n_tests == 0 {
        return Err(Error::Invalid("n_tests must be positive".into()));
    }
    let mut values = base_values(code, src, tgt)?;
    values.insert("entry_function", entry_function.to_string());
    values.insert("n_tests", n_tests.to_string());
    render(TemplateId::Testgen, &values, src, tgt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMethod {
    FencedBlock,
    AnswerMarker,
    WholeText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedCompletion {
    pub reasoning: String,
    pub code: String,
    pub raw: String,
    pub extraction_method: ExtractionMethod,
}

#[derive(Debug, Clone)]
pub struct FencedBlock {
    /// Lowercased first word of the info string; empty when unlabeled.
    pub label: String,
    /// Byte offset of the opening fence line.
    pub start: usize,
    /// Byte range of the block body.
    pub body: std::ops::Range<usize>,
}

fn fence_info(line: &str) -> Option<&str> {
    let indent = line.len() - line.trim_start_matches(' ').len();
    if indent > 3 {
        return None;
    }
    line[indent..].strip_prefix("```").map(|rest| rest.trim_start_matches('`'))
}

/// Fenced code blocks of `raw`, in order. An unclosed final block runs to the end.
pub fn fenced_blocks(raw: &str) -> Vec<FencedBlock> {
    let mut blocks = Vec::new();
    let mut open: Option<(String, usize, usize)> = None;
    let mut offset = 0;
    for line in raw.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        match &open {
            None => {
                if let Some(info) = fence_info(content) {
                    let label = info.split_whitespace().next().unwrap_or("").to_ascii_lowercase();
                    open = Some((label, offset, offset + line.len()));
                }
            }
            Some((label, start, body_start)) => {
                if fence_info(content).is_some_and(|info| info.trim().is_empty()) {
                    // The newline before the closing fence belongs to the fence.
                    let mut body_end = offset.max(*body_start);
                    if body_end > *body_start && raw[..body_end].ends_with('\n') {
                        body_end -= 1;
                        if body_end > *body_start && raw[..body_end].ends_with('\r') {
                            body_end -= 1;
                        }
                    }
                    blocks.push(FencedBlock {
                        label: label.clone(),
                        start: *start,
                        body: *body_start..body_end,
                    });
                    open = None;
                }
            }
        }
        offset += line.len();
    }
    if let Some((label, start, body_start)) = open {
        let body_start = body_start.min(raw.len());
        let body_end = body_start + raw[body_start..].trim_end().len();
        blocks.push(FencedBlock {
            label,
            start,
            body: body_start..body_end,
        });
    }
    blocks
}

/// Splits a completion into reasoning and code.
///
/// Precedence: last block labeled with the target language, last unlabeled
/// block, text after the final answer cue, whole text.
pub fn parse_completion(raw: &str, tgt: LanguageId) -> ParsedCompletion {
    let blocks = fenced_blocks(raw);
    let labeled = blocks
        .iter()
        .rev()
        .find(|b| tgt.fence_labels().contains(&b.label.as_str()));
    let chosen = labeled.or_else(|| blocks.iter().rev().find(|b| b.label.is_empty()));
    if let Some(block) = chosen {
        return ParsedCompletion {
            reasoning: raw[..block.start].trim().to_string(),
            code: raw[block.body.clone()].to_string(),
            raw: raw.to_string(),
            extraction_method: ExtractionMethod::FencedBlock,
        };
    }
    if let Some(pos) = raw.rfind(ANSWER_CUE) {
        let after = &raw[pos + ANSWER_CUE.len()..];
        return ParsedCompletion {
            reasoning: raw[..pos].trim().to_string(),
            code: after.trim().to_string(),
            raw: raw.to_string(),
            extraction_method: ExtractionMethod::AnswerMarker,
        };
    }
    ParsedCompletion {
        reasoning: String::new(),
        code: raw.trim().to_string(),
        raw: raw.to_string(),
        extraction_method: ExtractionMethod::WholeText,
    }
}
