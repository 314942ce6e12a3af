//! Def-use graph extraction and matching for the data-flow component.
//!
//! Every identifier leaf becomes a node keyed by its token index. A read
//! "comes from" the definitions reaching it; an assignment target is
//! "computed from" the identifiers on the right-hand side. Branches are walked
//! from a shared state and merged; loop bodies are walked twice so
//! loop-carried definitions reach the top of the body.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use tree_sitter::Node;

use super::grammar::{leaves, ParsedCode};
use crate::lang::LanguageId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    ComesFrom,
    ComputedFrom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfgNode {
    pub name: String,
    pub index: usize,
    pub relation: Relation,
    /// (name, token index) of each source, ordered by index.
    pub parents: Vec<(String, usize)>,
}

/// A def-use edge with variable names replaced by `var_<i>` in order of appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalizedEdge {
    pub var: String,
    pub relation: Relation,
    pub parents: Vec<String>,
}

type States = BTreeMap<String, BTreeSet<usize>>;

struct Kinds {
    assignment: &'static [&'static str],
    augmented: &'static [&'static str],
    declarator: &'static [&'static str],
    parameter: &'static [&'static str],
    update: &'static [&'static str],
    if_stmt: &'static [&'static str],
    for_stmt: &'static [&'static str],
    for_each: &'static [&'static str],
    while_stmt: &'static [&'static str],
    do_stmt: &'static [&'static str],
    target_lists: &'static [&'static str],
    wrapped_declarators: &'static [&'static str],
}

const PYTHON: Kinds = Kinds {
    assignment: &["assignment", "named_expression"],
    augmented: &["augmented_assignment"],
    declarator: &[],
    parameter: &["parameters", "lambda_parameters"],
    update: &[],
    if_stmt: &["if_statement"],
    for_stmt: &[],
    for_each: &["for_statement", "for_in_clause"],
    while_stmt: &["while_statement"],
    do_stmt: &[],
    target_lists: &["pattern_list", "tuple_pattern", "list_pattern", "expression_list", "tuple", "list"],
    wrapped_declarators: &[],
};

const JAVA: Kinds = Kinds {
    assignment: &["assignment_expression"],
    augmented: &[],
    declarator: &["variable_declarator"],
    parameter: &["formal_parameter", "catch_formal_parameter", "spread_parameter"],
    update: &["update_expression"],
    if_stmt: &["if_statement"],
    for_stmt: &["for_statement"],
    for_each: &["enhanced_for_statement"],
    while_stmt: &["while_statement"],
    do_stmt: &["do_statement"],
    target_lists: &[],
    wrapped_declarators: &[],
};

const CPP: Kinds = Kinds {
    assignment: &["assignment_expression"],
    augmented: &[],
    declarator: &["init_declarator"],
    parameter: &["parameter_declaration", "optional_parameter_declaration"],
    update: &["update_expression"],
    if_stmt: &["if_statement"],
    for_stmt: &["for_statement"],
    for_each: &["for_range_loop"],
    while_stmt: &["while_statement"],
    do_stmt: &["do_statement"],
    target_lists: &[],
    wrapped_declarators: &["pointer_declarator", "reference_declarator", "array_declarator", "parenthesized_declarator"],
};

fn kinds(lang: LanguageId) -> &'static Kinds {
    match lang {
        LanguageId::Python => &PYTHON,
        LanguageId::Java => &JAVA,
        LanguageId::Cpp => &CPP,
    }
}

struct Walker<'a> {
    parsed: &'a ParsedCode,
    kinds: &'static Kinds,
    index: HashMap<usize, usize>,
    nodes: Vec<DfgNode>,
}

fn field<'t>(node: &Node<'t>, name: &str) -> Option<Node<'t>> {
    node.child_by_field_name(name)
}

fn fields<'t>(node: &Node<'t>, name: &str) -> Vec<Node<'t>> {
    let mut cursor = node.walk();
    node.children_by_field_name(name, &mut cursor).collect()
}

fn children<'t>(node: &Node<'t>) -> Vec<Node<'t>> {
    (0..node.child_count()).filter_map(|i| node.child(i as _)).collect()
}

fn merge_into(into: &mut States, other: &States) {
    for (name, defs) in other {
        into.entry(name.clone()).or_default().extend(defs.iter().copied());
    }
}

impl<'a> Walker<'a> {
    fn new(parsed: &'a ParsedCode) -> Self {
        let index = leaves(parsed.root())
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id(), i))
            .collect();
        Self {
            parsed,
            kinds: kinds(parsed.language),
            index,
            nodes: Vec::new(),
        }
    }

    fn is_identifier(&self, node: &Node<'_>) -> bool {
        node.kind() == "identifier" && self.index.contains_key(&node.id())
    }

    fn name(&self, node: &Node<'_>) -> String {
        self.parsed.text(node).to_string()
    }

    fn identifiers_in(&self, node: &Node<'_>) -> Vec<(String, usize)> {
        leaves(*node)
            .iter()
            .filter(|n| self.is_identifier(n))
            .map(|n| (self.name(n), self.index[&n.id()]))
            .collect()
    }

    fn push(&mut self, name: String, index: usize, relation: Relation, parents: Vec<(String, usize)>) {
        self.nodes.push(DfgNode { name, index, relation, parents });
    }

    /// Plain identifiers a target expression or declarator binds, or `None` when
    /// the target is something else (a subscript, a field).
    fn targets<'t>(&self, node: Node<'t>) -> Option<Vec<Node<'t>>> {
        if self.is_identifier(&node) {
            return Some(vec![node]);
        }
        let kind = node.kind();
        if self.kinds.target_lists.contains(&kind) {
            let mut out = Vec::new();
            let mut cursor = node.walk();
            for child in node.named_children(&mut cursor) {
                out.extend(self.targets(child)?);
            }
            return Some(out);
        }
        if self.kinds.wrapped_declarators.contains(&kind) {
            let inner = field(&node, "declarator").or_else(|| {
                let mut cursor = node.walk();
                let found = node.named_children(&mut cursor).find(|c| self.is_identifier(c));
                found
            })?;
            return self.targets(inner);
        }
        None
    }

    fn define(&mut self, target: &Node<'_>, relation: Relation, parents: Vec<(String, usize)>, states: &mut States) {
        let name = self.name(target);
        let index = self.index[&target.id()];
        self.push(name.clone(), index, relation, parents);
        states.insert(name, BTreeSet::from([index]));
    }

    fn reaching(&self, name: &str, states: &States) -> Vec<(String, usize)> {
        states
            .get(name)
            .map(|defs| defs.iter().map(|&d| (name.to_string(), d)).collect())
            .unwrap_or_default()
    }

    /// `lhs = rhs`; with `augmented`, the old value of each target is a source too.
    fn assign(&mut self, lhs: Option<Node<'_>>, rhs: Option<Node<'_>>, augmented: bool, states: &mut States) {
        if let Some(rhs) = rhs {
            self.walk(rhs, states);
        }
        let Some(lhs) = lhs else { return };
        let sources = rhs.map(|r| self.identifiers_in(&r)).unwrap_or_default();
        match self.targets(lhs) {
            Some(targets) => {
                for target in targets {
                    let mut parents = sources.clone();
                    if augmented {
                        parents.extend(self.reaching(&self.name(&target), states));
                    }
                    let relation = if rhs.is_some() { Relation::ComputedFrom } else { Relation::ComesFrom };
                    self.define(&target, relation, parents, states);
                }
            }
            None => self.walk(lhs, states),
        }
    }

    fn walk(&mut self, node: Node<'_>, states: &mut States) {
        let kind = node.kind();
        let k = self.kinds;
        if node.child_count() == 0 {
            if self.is_identifier(&node) {
                let name = self.name(&node);
                let index = self.index[&node.id()];
                if states.contains_key(&name) {
                    let parents = self.reaching(&name, states);
                    self.push(name, index, Relation::ComesFrom, parents);
                } else {
                    self.push(name.clone(), index, Relation::ComesFrom, Vec::new());
                    states.insert(name, BTreeSet::from([index]));
                }
            }
            return;
        }
        if k.assignment.contains(&kind) || k.augmented.contains(&kind) {
            let lhs = field(&node, "left").or_else(|| field(&node, "name"));
            let rhs = field(&node, "right").or_else(|| field(&node, "value"));
            let augmented = k.augmented.contains(&kind)
                || (kind == "assignment_expression"
                    && field(&node, "operator").is_some_and(|op| self.parsed.text(&op) != "="));
            self.assign(lhs, rhs, augmented, states);
        } else if k.declarator.contains(&kind) {
            let lhs = field(&node, "declarator").or_else(|| field(&node, "name"));
            self.assign(lhs, field(&node, "value"), false, states);
        } else if k.parameter.contains(&kind) {
            self.parameters(node, states);
        } else if k.update.contains(&kind) {
            let target = field(&node, "argument").or_else(|| {
                let found = children(&node).into_iter().find(|c| self.is_identifier(c));
                found
            });
            match target.filter(|t| self.is_identifier(t)) {
                Some(t) => {
                    let parents = self.reaching(&self.name(&t), states);
                    self.define(&t, Relation::ComputedFrom, parents, states);
                }
                None => self.walk_children(node, states),
            }
        } else if k.if_stmt.contains(&kind) {
            self.branches(node, states);
        } else if k.for_each.contains(&kind) {
            let target = field(&node, "left").or_else(|| field(&node, "name")).or_else(|| field(&node, "declarator"));
            let iterable = field(&node, "right").or_else(|| field(&node, "value"));
            if let Some(iterable) = iterable {
                self.walk(iterable, states);
            }
            let body = field(&node, "body");
            for _ in 0..2 {
                let sources = iterable.map(|r| self.identifiers_in(&r)).unwrap_or_default();
                if let Some(targets) = target.and_then(|t| self.targets(t)) {
                    for t in targets {
                        self.define(&t, Relation::ComputedFrom, sources.clone(), states);
                    }
                }
                if let Some(body) = body {
                    self.walk(body, states);
                }
            }
            if let Some(alt) = field(&node, "alternative") {
                self.walk(alt, states);
            }
        } else if k.for_stmt.contains(&kind) {
            for init in fields(&node, "init").into_iter().chain(fields(&node, "initializer")) {
                self.walk(init, states);
            }
            let condition = field(&node, "condition");
            let updates: Vec<Node<'_>> = fields(&node, "update");
            let body = field(&node, "body");
            for _ in 0..2 {
                if let Some(c) = condition {
                    self.walk(c, states);
                }
                if let Some(b) = body {
                    self.walk(b, states);
                }
                for u in &updates {
                    self.walk(*u, states);
                }
            }
        } else if k.while_stmt.contains(&kind) || k.do_stmt.contains(&kind) {
            let condition = field(&node, "condition");
            let body = field(&node, "body");
            let body_first = k.do_stmt.contains(&kind);
            for _ in 0..2 {
                if body_first {
                    if let Some(b) = body {
                        self.walk(b, states);
                    }
                }
                if let Some(c) = condition {
                    self.walk(c, states);
                }
                if !body_first {
                    if let Some(b) = body {
                        self.walk(b, states);
                    }
                }
            }
            if let Some(alt) = field(&node, "alternative") {
                self.walk(alt, states);
            }
        } else {
            self.walk_children(node, states);
        }
    }

    fn walk_children(&mut self, node: Node<'_>, states: &mut States) {
        for child in children(&node) {
            self.walk(child, states);
        }
    }

    fn parameters(&mut self, node: Node<'_>, states: &mut States) {
        match self.parsed.language {
            LanguageId::Python => {
                for child in children(&node) {
                    if self.is_identifier(&child) {
                        self.define(&child, Relation::ComesFrom, Vec::new(), states);
                        continue;
                    }
                    match child.kind() {
                        "default_parameter" | "typed_default_parameter" => {
                            if let Some(v) = field(&child, "value") {
                                self.walk(v, states);
                            }
                            if let Some(n) = field(&child, "name").filter(|n| self.is_identifier(n)) {
                                self.define(&n, Relation::ComesFrom, Vec::new(), states);
                            }
                        }
                        "typed_parameter" | "list_splat_pattern" | "dictionary_splat_pattern" => {
                            let ids: Vec<Node<'_>> =
                                children(&child).into_iter().filter(|c| self.is_identifier(c)).collect();
                            for id in ids {
                                self.define(&id, Relation::ComesFrom, Vec::new(), states);
                            }
                        }
                        _ => self.walk(child, states),
                    }
                }
            }
            LanguageId::Java | LanguageId::Cpp => {
                let declarator = field(&node, "name").or_else(|| field(&node, "declarator"));
                if let Some(v) = field(&node, "default_value") {
                    self.walk(v, states);
                }
                match declarator.and_then(|d| self.targets(d)) {
                    Some(targets) => {
                        for t in targets {
                            self.define(&t, Relation::ComesFrom, Vec::new(), states);
                        }
                    }
                    None => {
                        if let Some(d) = declarator {
                            self.walk(d, states);
                        }
                    }
                }
            }
        }
    }

    fn branches(&mut self, node: Node<'_>, states: &mut States) {
        if let Some(c) = field(&node, "condition") {
            self.walk(c, states);
        }
        let alternatives = fields(&node, "alternative");
        let has_else = match self.parsed.language {
            LanguageId::Python => alternatives.iter().any(|a| a.kind() == "else_clause"),
            LanguageId::Java | LanguageId::Cpp => !alternatives.is_empty(),
        };
        let mut arms: Vec<Node<'_>> = fields(&node, "consequence");
        arms.extend(alternatives);
        let before = states.clone();
        let mut merged = if has_else { States::new() } else { before.clone() };
        for arm in arms {
            let mut local = before.clone();
            self.walk(arm, &mut local);
            merge_into(&mut merged, &local);
        }
        *states = merged;
    }
}

/// Def-use nodes after merging duplicates and dropping isolated identifiers.
pub fn extract(parsed: &ParsedCode) -> Vec<DfgNode> {
    let mut walker = Walker::new(parsed);
    let mut states = States::new();
    walker.walk(parsed.root(), &mut states);

    let mut by_index: BTreeMap<usize, DfgNode> = BTreeMap::new();
    for node in walker.nodes {
        match by_index.get_mut(&node.index) {
            Some(existing) => {
                for p in node.parents {
                    if !existing.parents.contains(&p) {
                        existing.parents.push(p);
                    }
                }
            }
            None => {
                by_index.insert(node.index, node);
            }
        }
    }
    let mut connected = BTreeSet::new();
    for node in by_index.values() {
        if !node.parents.is_empty() {
            connected.insert(node.index);
        }
        connected.extend(node.parents.iter().map(|p| p.1));
    }
    by_index
        .into_values()
        .filter(|n| connected.contains(&n.index))
        .map(|mut n| {
            n.parents.sort_by_key(|p| p.1);
            n.parents.dedup();
            n
        })
        .collect()
}

/// Renames variables to `var_<i>` by first appearance, sources before targets.
pub fn normalize(nodes: &[DfgNode]) -> Vec<NormalizedEdge> {
    let mut names: HashMap<String, String> = HashMap::new();
    let rename = |name: &str, names: &mut HashMap<String, String>| {
        let next = names.len();
        names.entry(name.to_string()).or_insert_with(|| format!("var_{next}")).clone()
    };
    nodes
        .iter()
        .map(|n| {
            let mut parent_names: Vec<&str> = Vec::new();
            for (p, _) in &n.parents {
                if !parent_names.contains(&p.as_str()) {
                    parent_names.push(p);
                }
            }
            let parents = parent_names.iter().map(|p| rename(p, &mut names)).collect();
            let var = rename(&n.name, &mut names);
            NormalizedEdge { var, relation: n.relation, parents }
        })
        .collect()
}

/// Matched reference edges / reference edges; 1.0 when the reference has none.
pub fn match_score(hypothesis: &[NormalizedEdge], reference: &[NormalizedEdge]) -> f64 {
    if reference.is_empty() {
        return 1.0;
    }
    let mut pool: HashMap<&NormalizedEdge, usize> = HashMap::new();
    for edge in hypothesis {
        *pool.entry(edge).or_default() += 1;
    }
    let mut matched = 0usize;
    for edge in reference {
        if let Some(count) = pool.get_mut(edge) {
            if *count > 0 {
                *count -= 1;
                matched += 1;
            }
        }
    }
    matched as f64 / reference.len() as f64
}
