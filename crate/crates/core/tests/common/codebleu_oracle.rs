//! Brute-force CodeBLEU oracles and seeded program generators.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use reasontrans::LanguageId;
use regex::Regex;
use tree_sitter::{Node, Parser};

// ---------------------------------------------------------------- generators

pub struct Gen {
    rng: StdRng,
    lang: LanguageId,
}

impl Gen {
    pub fn new(lang: LanguageId, seed: u64) -> Self {
        Self { rng: StdRng::seed_from_u64(seed), lang }
    }

    pub fn pick<'a>(&mut self, items: &'a [String]) -> &'a str {
        &items[self.rng.random_range(0..items.len())]
    }

    pub fn expr(&mut self, vars: &[String]) -> String {
        let ops = ["+", "-", "*"];
        let a = self.pick(vars).to_string();
        let op = ops[self.rng.random_range(0..ops.len())];
        if self.rng.random_bool(0.4) {
            format!("{a} {op} {}", self.rng.random_range(1..10))
        } else {
            let b = self.pick(vars).to_string();
            format!("{a} {op} {b}")
        }
    }

    pub fn indent(depth: usize) -> String {
        "    ".repeat(depth)
    }

    pub fn assign(&mut self, target: &str, value: &str, declare: bool, depth: usize) -> String {
        let pad = Self::indent(depth);
        match self.lang {
            LanguageId::Python => format!("{pad}{target} = {value}\n"),
            _ if declare => format!("{pad}int {target} = {value};\n"),
            _ => format!("{pad}{target} = {value};\n"),
        }
    }

    /// A function with `n_stmts` statements; `structured` adds branches and loops.
    pub fn function(&mut self, n_stmts: usize, structured: bool) -> String {
        let mut vars: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let mut body = String::new();
        for k in 0..n_stmts {
            let choice = if structured { self.rng.random_range(0..4) } else { 0 };
            match choice {
                1 => {
                    let cond = format!("{} > {}", self.pick(&vars), self.pick(&vars));
                    let target = self.pick(&vars).to_string();
                    let (e1, e2) = (self.expr(&vars), self.expr(&vars));
                    let then = self.assign(&target, &e1, false, 2);
                    let other = self.assign(&target, &e2, false, 2);
                    body.push_str(&match self.lang {
                        LanguageId::Python => format!("    if {cond}:\n{then}    else:\n{other}"),
                        _ => format!("    if ({cond}) {{\n{then}    }} else {{\n{other}    }}\n"),
                    });
                }
                2 => {
                    let bound = self.pick(&vars).to_string();
                    let target = self.pick(&vars).to_string();
                    let update = self.assign(&target, &format!("{target} + i"), false, 2);
                    body.push_str(&match self.lang {
                        LanguageId::Python => format!("    for i in range({bound}):\n{update}"),
                        _ => format!("    for (int i = 0; i < {bound}; i++) {{\n{update}    }}\n"),
                    });
                }
                3 => {
                    let target = self.pick(&vars).to_string();
                    let halve = match self.lang {
                        LanguageId::Python => self.assign(&target, &format!("{target} // 2"), false, 2),
                        _ => self.assign(&target, &format!("{target} / 2"), false, 2),
                    };
                    body.push_str(&match self.lang {
                        LanguageId::Python => format!("    while {target} > 10:\n{halve}"),
                        _ => format!("    while ({target} > 10) {{\n{halve}    }}\n"),
                    });
                }
                _ => {
                    let name = format!("x{k}");
                    let value = self.expr(&vars);
                    body.push_str(&self.assign(&name, &value, true, 1));
                    vars.push(name);
                }
            }
        }
        let ret = self.expr(&vars);
        match self.lang {
            LanguageId::Python => format!("def f_gold(a, b, c):\n{body}    return {ret}\n"),
            LanguageId::Java => format!("static int f_gold(int a, int b, int c) {{\n{body}    return {ret};\n}}\n"),
            LanguageId::Cpp => format!("int f_gold(int a, int b, int c) {{\n{body}    return {ret};\n}}\n"),
        }
    }
}

/// Applies one small edit to a generated straight-line Python function.
pub fn mutate(code: &str, rng: &mut StdRng) -> String {
    let lines: Vec<&str> = code.lines().collect();
    let body: Vec<usize> = (1..lines.len() - 1).collect();
    let mut out: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
    let target = body[rng.random_range(0..body.len())];
    match rng.random_range(0..5) {
        0 => out[target] = out[target].replacen('+', "-", 1),
        1 => out[target] = out[target].replace(" a", " b"),
        2 => {
            out.remove(target);
        }
        3 => out.insert(target, "    tmp = a * b".to_string()),
        _ => {
            let renamed = Regex::new(r"\bx(\d+)\b").unwrap();
            return renamed.replace_all(code, "y$1").into_owned() + "\n";
        }
    }
    out.join("\n") + "\n"
}

// ---------------------------------------------------------------- oracles

pub fn parser(lang: LanguageId) -> Parser {
    let mut p = Parser::new();
    let language: tree_sitter::Language = match lang {
        LanguageId::Python => tree_sitter_python::LANGUAGE.into(),
        LanguageId::Java => tree_sitter_java::LANGUAGE.into(),
        LanguageId::Cpp => tree_sitter_cpp::LANGUAGE.into(),
    };
    p.set_language(&language).unwrap();
    p
}

pub fn collect_leaves(node: Node<'_>, src: &str, out: &mut Vec<String>) {
    if node.child_count() == 0 {
        let text = &src[node.byte_range()];
        if !text.trim().is_empty() {
            out.push(text.to_string());
        }
        return;
    }
    for i in 0..node.child_count() {
        collect_leaves(node.child(i as _).unwrap(), src, out);
    }
}

pub fn collect_sexps(node: Node<'_>, out: &mut Vec<String>) {
    if node.child_count() == 0 {
        return;
    }
    out.push(node.to_sexp());
    for i in 0..node.child_count() {
        collect_sexps(node.child(i as _).unwrap(), out);
    }
}

/// Counts n-gram matches by scanning with per-position "used" flags (clipping by pairing).
pub fn clipped_matches(hyp: &[String], reference: &[String], n: usize) -> usize {
    if hyp.len() < n || reference.len() < n {
        return 0;
    }
    let mut used = vec![false; reference.len() - n + 1];
    let mut matched = 0;
    for i in 0..=hyp.len() - n {
        for j in 0..used.len() {
            if !used[j] && hyp[i..i + n] == reference[j..j + n] {
                used[j] = true;
                matched += 1;
                break;
            }
        }
    }
    matched
}

pub fn oracle_bleu(hyp: &[String], reference: &[String]) -> f64 {
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let matched = clipped_matches(hyp, reference, n) as f64;
        let total = hyp.len().saturating_sub(n - 1) as f64;
        let p = if n == 1 { if total == 0.0 { 0.0 } else { matched / total } } else { (matched + 1.0) / (total + 1.0) };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln() / 4.0;
    }
    let (c, r) = (hyp.len() as f64, reference.len() as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    bp * log_sum.exp()
}

pub fn oracle_weighted_bleu(hyp: &[String], reference: &[String], keywords: &[&str]) -> f64 {
    let w = |t: &String| if keywords.contains(&t.as_str()) { 1.0 } else { 0.2 };
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let p = if n == 1 {
            // Pair each reference token with an unused identical hypothesis token.
            let mut used = vec![false; hyp.len()];
            let (mut matched, mut total) = (0.0, 0.0);
            for t in reference {
                total += w(t);
                if let Some(j) = (0..hyp.len()).find(|&j| !used[j] && hyp[j] == *t) {
                    used[j] = true;
                    matched += w(t);
                }
            }
            if total == 0.0 { 0.0 } else { matched / total }
        } else {
            let matched = clipped_matches(reference, hyp, n) as f64;
            let total = reference.len().saturating_sub(n - 1) as f64;
            (matched + 1.0) / (total + 1.0)
        };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln() / 4.0;
    }
    let (c, r) = (hyp.len() as f64, reference.len() as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    bp * log_sum.exp()
}

pub fn oracle_ast(hyp: &[String], reference: &[String]) -> f64 {
    let matched = reference.iter().filter(|s| hyp.iter().any(|h| h == *s)).count();
    matched as f64 / reference.len() as f64
}

/// Def-use edges of a straight-line Python function, worked out from a
/// regex tokenization rather than the syntax tree.
pub fn oracle_dataflow_edges(code: &str) -> Vec<(String, &'static str, Vec<String>)> {
    let token = Regex::new(r"[A-Za-z_]\w*|\d+|//|\S").unwrap();
    let keywords = ["def", "return"];
    // (name, position, relation, parent positions with names)
    let mut nodes: Vec<(String, usize, &'static str, Vec<(String, usize)>)> = Vec::new();
    let mut defs: HashMap<String, usize> = HashMap::new();
    let mut pos = 0;
    let is_ident = |t: &str| t.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_') && !keywords.contains(&t);
    for line in code.lines() {
        let toks: Vec<String> = token.find_iter(line).map(|m| m.as_str().to_string()).collect();
        let base = pos;
        pos += toks.len();
        let read = |name: &str, at: usize, nodes: &mut Vec<_>, defs: &mut HashMap<String, usize>| match defs.get(name) {
            Some(&d) => nodes.push((name.to_string(), at, "comes", vec![(name.to_string(), d)])),
            None => {
                defs.insert(name.to_string(), at);
                nodes.push((name.to_string(), at, "comes", vec![]));
            }
        };
        if toks.first().map(String::as_str) == Some("def") {
            read(&toks[1], base + 1, &mut nodes, &mut defs);
            for (i, t) in toks.iter().enumerate().skip(2) {
                if is_ident(t) {
                    defs.insert(t.clone(), base + i);
                    nodes.push((t.clone(), base + i, "comes", vec![]));
                }
            }
        } else if toks.len() > 1 && toks[1] == "=" {
            let sources: Vec<(String, usize)> = toks
                .iter()
                .enumerate()
                .skip(2)
                .filter(|(_, t)| is_ident(t))
                .map(|(i, t)| (t.clone(), base + i))
                .collect();
            for (name, at) in &sources {
                read(name, *at, &mut nodes, &mut defs);
            }
            nodes.push((toks[0].clone(), base, "computed", sources));
            defs.insert(toks[0].clone(), base);
        } else {
            for (i, t) in toks.iter().enumerate() {
                if is_ident(t) {
                    read(t, base + i, &mut nodes, &mut defs);
                }
            }
        }
    }
    nodes.sort_by_key(|n| n.1);
    let mut connected = std::collections::HashSet::new();
    for n in &nodes {
        if !n.3.is_empty() {
            connected.insert(n.1);
        }
        for p in &n.3 {
            connected.insert(p.1);
        }
    }
    let mut names: HashMap<String, String> = HashMap::new();
    let mut edges = Vec::new();
    for (name, at, rel, parents) in nodes {
        if !connected.contains(&at) {
            continue;
        }
        let mut parent_names: Vec<String> = Vec::new();
        for (p, _) in &parents {
            if !parent_names.contains(p) {
                parent_names.push(p.clone());
            }
        }
        let mut mapped = Vec::new();
        for p in parent_names {
            let next = names.len();
            mapped.push(names.entry(p).or_insert_with(|| format!("var_{next}")).clone());
        }
        let next = names.len();
        let var = names.entry(name).or_insert_with(|| format!("var_{next}")).clone();
        edges.push((var, rel, mapped));
    }
    edges
}

pub fn oracle_dataflow(hyp: &str, reference: &str) -> f64 {
    let mut pool = oracle_dataflow_edges(hyp);
    let reference = oracle_dataflow_edges(reference);
    if reference.is_empty() {
        return 1.0;
    }
    let mut matched = 0;
    for edge in &reference {
        if let Some(i) = pool.iter().position(|e| e == edge) {
            pool.remove(i);
            matched += 1;
        }
    }
    matched as f64 / reference.len() as f64
}

pub fn keyword_list(lang: LanguageId) -> Vec<&'static str> {
    let text = match lang {
        LanguageId::Python => include_str!("../../data/keywords/v1/python.txt"),
        LanguageId::Java => include_str!("../../data/keywords/v1/java.txt"),
        LanguageId::Cpp => include_str!("../../data/keywords/v1/cpp.txt"),
    };
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect()
}

pub struct OracleScores {
    pub ngram: f64,
    pub weighted: f64,
    pub ast: f64,
}

pub fn oracle_scores(hyp: &str, reference: &str, lang: LanguageId) -> OracleScores {
    let mut p = parser(lang);
    let h = p.parse(hyp, None).unwrap();
    let r = p.parse(reference, None).unwrap();
    let (mut ht, mut rt) = (Vec::new(), Vec::new());
    collect_leaves(h.root_node(), hyp, &mut ht);
    collect_leaves(r.root_node(), reference, &mut rt);
    let (mut hs, mut rs) = (Vec::new(), Vec::new());
    collect_sexps(h.root_node(), &mut hs);
    collect_sexps(r.root_node(), &mut rs);
    OracleScores {
        ngram: oracle_bleu(&ht, &rt),
        weighted: oracle_weighted_bleu(&ht, &rt, &keyword_list(lang)),
        ast: oracle_ast(&hs, &rs),
    }
}

pub const LANGS: [LanguageId; 3] = [LanguageId::Python, LanguageId::Java, LanguageId::Cpp];

pub fn fixtures(lang: LanguageId, count: usize, structured: bool, seed: u64) -> Vec<String> {
    let mut gen = Gen::new(lang, seed);
    (0..count).map(|i| gen.function(2 + i % 6, structured)).collect()
}

/// Renames every identifier consistently to `v<i>`.
pub fn rename_identifiers(code: &str, lang: LanguageId) -> String {
    let mut p = parser(lang);
    let tree = p.parse(code, None).unwrap();
    let mut spans = Vec::new();
    let mut stack = vec![tree.root_node()];
    while let Some(n) = stack.pop() {
        if n.kind() == "identifier" && n.child_count() == 0 {
            spans.push(n.byte_range());
        }
        for i in 0..n.child_count() {
            stack.push(n.child(i as _).unwrap());
        }
    }
    spans.sort_by_key(|r| r.start);
    let mut names: HashMap<String, String> = HashMap::new();
    let mut out = String::new();
    let mut last = 0;
    for span in spans {
        out.push_str(&code[last..span.start]);
        let old = &code[span.clone()];
        let next = names.len();
        out.push_str(names.entry(old.to_string()).or_insert_with(|| format!("v{next}")));
        last = span.end;
    }
    out.push_str(&code[last..]);
    out
}
