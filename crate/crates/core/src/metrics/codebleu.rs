//! CodeBLEU: n-gram BLEU, keyword-weighted BLEU, syntax subtree match and
//! data-flow match, combined with configurable weights.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::dataflow;
use super::grammar::{self, ParsedCode};
use crate::error::{Error, Result};
use crate::lang::LanguageId;

pub const MAX_ORDER: usize = 4;
pub const KEYWORD_WEIGHT: f64 = 1.0;
pub const OTHER_WEIGHT: f64 = 0.2;

/// (α, β, γ, δ) for ngram, weighted ngram, syntax and data flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuWeights {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub syntax: f64,
    pub dataflow: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        Self {
            ngram: 0.25,
            weighted_ngram: 0.25,
            syntax: 0.25,
            dataflow: 0.25,
        }
    }
}

impl CodeBleuWeights {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.ngram, self.weighted_ngram, self.syntax, self.dataflow];
        if parts.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Invalid("CodeBLEU weights must be non-negative".into()));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("CodeBLEU weights sum to {sum}, not 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuScore {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub ast_match: f64,
    pub dataflow_match: f64,
    pub total: f64,
    pub weights: CodeBleuWeights,
    /// Set when the hypothesis did not parse; syntax and data flow then score 0.
    pub hypothesis_parse_failed: bool,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn brevity_penalty(hyp_len: usize, ref_len: usize) -> f64 {
    if hyp_len == 0 {
        0.0
    } else if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    }
}

/// Geometric mean of the precisions with uniform weights, times the brevity penalty.
fn combine(precisions: [f64; MAX_ORDER], hyp_len: usize, ref_len: usize) -> f64 {
    if precisions.iter().any(|&p| p <= 0.0) {
        return 0.0;
    }
    let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
    brevity_penalty(hyp_len, ref_len) * log_mean.exp()
}

/// BLEU-4 over token sequences; orders 2..4 use add-one smoothing.
pub fn bleu(hypothesis: &[String], reference: &[String]) -> f64 {
    let mut precisions = [0.0; MAX_ORDER];
    for n in 1..=MAX_ORDER {
        let hyp = ngram_counts(hypothesis, n);
        let refs = ngram_counts(reference, n);
        let matched: usize = hyp.iter().map(|(g, &c)| c.min(*refs.get(g).unwrap_or(&0))).sum();
        let total = hypothesis.len().saturating_sub(n - 1);
        precisions[n - 1] = if n == 1 {
            if total == 0 { 0.0 } else { matched as f64 / total as f64 }
        } else {
            (matched as f64 + 1.0) / (total as f64 + 1.0)
        };
    }
    combine(precisions, hypothesis.len(), reference.len())
}

/// Keyword-weighted BLEU-4. Like the reference formulation, each order scores
/// clipped matches against the reference's n-gram count; unigrams are weighted
/// 1.0 for keywords and 0.2 otherwise.
pub fn weighted_bleu(hypothesis: &[String], reference: &[String], keywords: &HashSet<&str>) -> f64 {
    let weight = |t: &str| if keywords.contains(t) { KEYWORD_WEIGHT } else { OTHER_WEIGHT };
    let mut precisions = [0.0; MAX_ORDER];
    for n in 1..=MAX_ORDER {
        let hyp = ngram_counts(hypothesis, n);
        let refs = ngram_counts(reference, n);
        precisions[n - 1] = if n == 1 {
            let matched: f64 = refs
                .iter()
                .map(|(g, &c)| c.min(*hyp.get(g).unwrap_or(&0)) as f64 * weight(&g[0]))
                .sum();
            let total: f64 = refs.iter().map(|(g, &c)| c as f64 * weight(&g[0])).sum();
            if total == 0.0 { 0.0 } else { matched / total }
        } else {
            let matched: usize = refs.iter().map(|(g, &c)| c.min(*hyp.get(g).unwrap_or(&0))).sum();
            let total = reference.len().saturating_sub(n - 1);
            (matched as f64 + 1.0) / (total as f64 + 1.0)
        };
    }
    combine(precisions, hypothesis.len(), reference.len())
}

/// S-expressions of every node that has children.
pub fn subtrees(parsed: &ParsedCode) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![parsed.root()];
    while let Some(node) = stack.pop() {
        let count = node.child_count();
        if count == 0 {
            continue;
        }
        out.push(node.to_sexp());
        for i in 0..count {
            if let Some(child) = node.child(i as _) {
                stack.push(child);
            }
        }
    }
    out
}

/// Share of reference subtrees that also occur in the hypothesis.
pub fn ast_match(hypothesis: &ParsedCode, reference: &ParsedCode) -> f64 {
    let reference = subtrees(reference);
    if reference.is_empty() {
        return 1.0;
    }
    let candidate: HashSet<String> = subtrees(hypothesis).into_iter().collect();
    let matched = reference.iter().filter(|s| candidate.contains(*s)).count();
    matched as f64 / reference.len() as f64
}

pub fn dataflow_match(hypothesis: &ParsedCode, reference: &ParsedCode) -> f64 {
    let hyp = dataflow::normalize(&dataflow::extract(hypothesis));
    let reference = dataflow::normalize(&dataflow::extract(reference));
    dataflow::match_score(&hyp, &reference)
}

fn normalize_source(code: &str) -> String {
    let mut text: String = code.lines().map(str::trim_end).collect::<Vec<_>>().join("\n");
    text.push('\n');
    text
}

pub fn codebleu(hypothesis: &str, reference: &str, language: LanguageId, weights: CodeBleuWeights) -> Result<CodeBleuScore> {
    weights.validate()?;
    if hypothesis.trim().is_empty() {
        return Err(Error::Invalid("hypothesis is empty".into()));
    }
    if reference.trim().is_empty() {
        return Err(Error::Invalid("reference is empty".into()));
    }
    let reference = grammar::parse(&normalize_source(reference), language)?;
    if reference.has_error() {
        return Err(Error::Invalid(format!("reference {language} code does not parse")));
    }
    let hypothesis = grammar::parse(&normalize_source(hypothesis), language)?;
    let hyp_tokens = grammar::tokens(&hypothesis);
    let ref_tokens = grammar::tokens(&reference);
    let ngram = bleu(&hyp_tokens, &ref_tokens);
    let weighted_ngram = weighted_bleu(&hyp_tokens, &ref_tokens, grammar::keywords(language));
    let failed = hypothesis.has_error();
    let (ast, flow) = if failed {
        (0.0, 0.0)
    } else {
        (ast_match(&hypothesis, &reference), dataflow_match(&hypothesis, &reference))
    };
    let total = weights.ngram * ngram
        + weights.weighted_ngram * weighted_ngram
        + weights.syntax * ast
        + weights.dataflow * flow;
    Ok(CodeBleuScore {
        ngram,
        weighted_ngram,
        ast_match: ast,
        dataflow_match: flow,
        total,
        weights,
        hypothesis_parse_failed: failed,
    })
}
