//! CSV, Markdown and JSON renderings of metrics rows.
//!
//! With a baseline, each treated row is annotated per metric with the
//! relative change `(treated - base) / base` as an arrow and a signed
//! percentage with one decimal, e.g. `↑27.4%`; changes that round to zero
//! render as `±0.0%`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::LanguagePair;
use crate::metrics::MetricsReport;

pub const CSV_HEADER: [&str; 7] = [
    "Translation Pair",
    "Method",
    "CA (%)",
    "APR (%)",
    "CodeBLEU (%)",
    "# Tokens",
    "Latency (s)",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Md,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Md => "md",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Md),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Invalid(format!("unknown report format {other:?}"))),
        }
    }
}

/// Relative change from `base` to `treated` as an arrow and a one-decimal percentage.
pub fn format_delta(base: f64, treated: f64) -> String {
    if base == 0.0 {
        return if treated == 0.0 { "±0.0%".into() } else { "n/a".into() };
    }
    let pct = (treated - base) / base.abs() * 100.0;
    let rounded = format!("{:.1}", pct.abs());
    if rounded == "0.0" {
        "±0.0%".into()
    } else if pct > 0.0 {
        format!("↑{rounded}%")
    } else {
        format!("↓{rounded}%")
    }
}

fn values(r: &MetricsReport) -> [f64; 5] {
    [r.ca_pct, r.apr_pct, r.codebleu_pct, r.avg_tokens, r.avg_latency_s]
}

fn cells(r: &MetricsReport) -> [String; 5] {
    values(r).map(|v| format!("{v:.2}"))
}

fn method(r: &MetricsReport) -> &str {
    if r.method.is_empty() { "-" } else { &r.method }
}

fn find_base<'a>(baseline: &'a [MetricsReport], pair: LanguagePair) -> Option<&'a MetricsReport> {
    baseline.iter().find(|b| b.pair == pair)
}

pub fn render_csv(reports: &[MetricsReport]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in reports {
        let [ca, apr, bleu, tokens, latency] = cells(r);
        writer
            .write_record([r.pair.to_string(), method(r).to_string(), ca, apr, bleu, tokens, latency])
            .map_err(csv_error)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Invalid(format!("CSV output: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(format!("CSV output: {e}")))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Invalid(format!("CSV output: {e}"))
}

pub fn render_markdown(reports: &[MetricsReport], baseline: Option<&[MetricsReport]>) -> String {
    let mut out = format!("| {} |\n|{}\n", CSV_HEADER.join(" | "), "---|".repeat(CSV_HEADER.len()));
    for r in reports {
        let base = baseline.and_then(|b| find_base(b, r.pair));
        if let Some(b) = base {
            let _ = writeln!(out, "| {} | {} | {} |", b.pair, method(b), cells(b).join(" | "));
        }
        let shown: Vec<String> = match base {
            Some(b) => cells(r)
                .iter()
                .zip(values(b).iter().zip(values(r)))
                .map(|(cell, (bv, tv))| format!("{cell} {}", format_delta(*bv, tv)))
                .collect(),
            None => cells(r).to_vec(),
        };
        let _ = writeln!(out, "| {} | {} | {} |", r.pair, method(r), shown.join(" | "));
    }
    if reports.iter().any(|r| r.tokens_estimated) {
        out.push_str("\nToken counts include local estimates where the endpoint reported no usage.\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub ca: String,
    pub apr: String,
    pub codebleu: String,
    pub tokens: String,
    pub latency: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonRow {
    #[serde(flatten)]
    pub report: MetricsReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<MetricsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Deltas>,
}

pub fn render_json(reports: &[MetricsReport], baseline: Option<&[MetricsReport]>) -> Result<String> {
    let rows: Vec<JsonRow> = reports
        .iter()
        .map(|r| {
            let base = baseline.and_then(|b| find_base(b, r.pair)).cloned();
            let deltas = base.as_ref().map(|b| {
                let [ca, apr, codebleu, tokens, latency] = [0, 1, 2, 3, 4].map(|i| format_delta(values(b)[i], values(r)[i]));
                Deltas { ca, apr, codebleu, tokens, latency }
            });
            JsonRow { report: r.clone(), baseline: base, deltas }
        })
        .collect();
    Ok(serde_json::to_string_pretty(&rows)? + "\n")
}

pub fn emit_report(reports: &[MetricsReport], format: ReportFormat, baseline: Option<&[MetricsReport]>) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::Invalid("no reports to emit".into()));
    }
    match format {
        ReportFormat::Csv => render_csv(reports),
        ReportFormat::Md => Ok(render_markdown(reports, baseline)),
        ReportFormat::Json => render_json(reports, baseline),
    }
}

/// Writes `report.csv`, `report.md` and `report.json` into `dir`.
pub fn write_reports(dir: &Path, reports: &[MetricsReport], baseline: Option<&[MetricsReport]>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for format in [ReportFormat::Csv, ReportFormat::Md, ReportFormat::Json] {
        let path = dir.join(format!("report.{}", format.extension()));
        let text = emit_report(reports, format, baseline)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Reads rows back from `report.json` (annotations are dropped).
pub fn load_json_report(path: &Path) -> Result<Vec<MetricsReport>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows: Vec<JsonRow> = serde_json::from_str(&text)?;
    Ok(rows.into_iter().map(|r| r.report).collect())
}
