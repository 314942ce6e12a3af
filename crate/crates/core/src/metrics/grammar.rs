//! tree-sitter adapter: parsing, comment stripping, lexer tokens, keywords.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::sync::LazyLock;

use tree_sitter::{Language, Node, Parser, Tree};

use crate::error::{Error, Result};
use crate::lang::LanguageId;

pub fn ts_language(lang: LanguageId) -> Language {
    match lang {
        LanguageId::Python => tree_sitter_python::LANGUAGE.into(),
        LanguageId::Java => tree_sitter_java::LANGUAGE.into(),
        LanguageId::Cpp => tree_sitter_cpp::LANGUAGE.into(),
    }
}

thread_local! {
    static PARSERS: RefCell<HashMap<LanguageId, Parser>> = RefCell::new(HashMap::new());
}

fn parse_raw(code: &str, lang: LanguageId) -> Result<Tree> {
    PARSERS.with(|cell| {
        let mut parsers = cell.borrow_mut();
        let parser = match parsers.entry(lang) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                let mut parser = Parser::new();
                parser
                    .set_language(&ts_language(lang))
                    .map_err(|e| Error::Invalid(format!("tree-sitter grammar for {lang}: {e}")))?;
                e.insert(parser)
            }
        };
        parser
            .parse(code, None)
            .ok_or_else(|| Error::Invalid(format!("tree-sitter gave up parsing {lang} code")))
    })
}

fn is_comment(node: &Node<'_>) -> bool {
    matches!(node.kind(), "comment" | "line_comment" | "block_comment")
}

/// Source code parsed after blanking out comments.
pub struct ParsedCode {
    pub language: LanguageId,
    pub source: String,
    pub tree: Tree,
}

impl ParsedCode {
    pub fn root(&self) -> Node<'_> {
        self.tree.root_node()
    }

    pub fn has_error(&self) -> bool {
        self.root().has_error()
    }

    pub fn text(&self, node: &Node<'_>) -> &str {
        &self.source[node.byte_range()]
    }
}

/// Replaces comments with spaces (newlines kept) so positions and line structure survive.
pub fn strip_comments(code: &str, lang: LanguageId) -> Result<String> {
    let tree = parse_raw(code, lang)?;
    let mut ranges = Vec::new();
    let mut stack = vec![tree.root_node()];
    while let Some(node) = stack.pop() {
        if is_comment(&node) {
            ranges.push(node.byte_range());
            continue;
        }
        for i in 0..node.child_count() {
            if let Some(child) = node.child(i as _) {
                stack.push(child);
            }
        }
    }
    if ranges.is_empty() {
        return Ok(code.to_string());
    }
    let mut bytes = code.as_bytes().to_vec();
    for range in ranges {
        for b in &mut bytes[range] {
            if *b != b'\n' {
                *b = b' ';
            }
        }
    }
    // Only ASCII spaces were written over whole comment ranges, so UTF-8 stays valid.
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

pub fn parse(code: &str, lang: LanguageId) -> Result<ParsedCode> {
    let source = strip_comments(code, lang)?;
    let tree = parse_raw(&source, lang)?;
    Ok(ParsedCode { language: lang, source, tree })
}

/// Leaves in source order, skipping comments and zero-width nodes.
pub fn leaves<'t>(root: Node<'t>) -> Vec<Node<'t>> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if is_comment(&node) {
            continue;
        }
        let count = node.child_count();
        if count == 0 {
            if node.end_byte() > node.start_byte() {
                out.push(node);
            }
            continue;
        }
        for i in (0..count).rev() {
            if let Some(child) = node.child(i as _) {
                stack.push(child);
            }
        }
    }
    out
}

/// Lexer tokens of the parsed code.
pub fn tokens(parsed: &ParsedCode) -> Vec<String> {
    leaves(parsed.root())
        .iter()
        .map(|n| parsed.text(n).to_string())
        .filter(|t| !t.trim().is_empty())
        .collect()
}

fn keyword_file(lang: LanguageId) -> &'static str {
    match lang {
        LanguageId::Python => include_str!("../../data/keywords/v1/python.txt"),
        LanguageId::Java => include_str!("../../data/keywords/v1/java.txt"),
        LanguageId::Cpp => include_str!("../../data/keywords/v1/cpp.txt"),
    }
}

static KEYWORDS: LazyLock<HashMap<LanguageId, HashSet<&'static str>>> = LazyLock::new(|| {
    LanguageId::ALL
        .iter()
        .map(|&lang| {
            let words = keyword_file(lang)
                .lines()
                .map(str::trim)
                .filter(|w| !w.is_empty() && !w.starts_with('#'))
                .collect();
            (lang, words)
        })
        .collect()
});

pub fn keywords(lang: LanguageId) -> &'static HashSet<&'static str> {
    &KEYWORDS[&lang]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn python_tokens_skip_comments() {
        let parsed = parse("def f(a):  # note\n    return a + 1\n", LanguageId::Python).unwrap();
        assert_eq!(tokens(&parsed), ["def", "f", "(", "a", ")", ":", "return", "a", "+", "1"]);
        assert!(!parsed.has_error());
    }

    #[test]
    fn cpp_and_java_parse() {
        let cpp = parse("int f(int a) { /* x */ return a; }", LanguageId::Cpp).unwrap();
        assert!(!cpp.has_error());
        assert!(!tokens(&cpp).iter().any(|t| t.contains("x")));
        let java = parse("class A { int f(int a) { return a; } } // end", LanguageId::Java).unwrap();
        assert!(!java.has_error());
        assert_eq!(tokens(&java).last().unwrap(), "}");
    }

    #[test]
    fn broken_code_is_flagged() {
        assert!(parse("def f(:\n", LanguageId::Python).unwrap().has_error());
        assert!(parse("int f( { return }", LanguageId::Cpp).unwrap().has_error());
    }

    #[test]
    fn keyword_lists_load() {
        assert!(keywords(LanguageId::Python).contains("def"));
        assert!(keywords(LanguageId::Java).contains("static"));
        assert!(keywords(LanguageId::Cpp).contains("constexpr"));
        assert!(!keywords(LanguageId::Python).contains("print"));
    }
}
