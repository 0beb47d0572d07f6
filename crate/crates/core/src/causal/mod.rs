//! Causal models: rules over function labels that produce a goal effect.
//!
//! A model is a set of rules `a AND b CAUSES c`. Labels that never appear as
//! an effect are *function nodes* (the roots), the goal is the single sink,
//! and everything else is an *intermediate effect*. Within one rule the
//! antecedents conjoin; separate rules with the same effect are alternative
//! mechanisms and disjoin.
//!
//! Evaluation is binary and deterministic. Roots take their value from the
//! set of active functions, every other node is computed in topological
//! order from the rules that produce it.

mod dsl;
mod graph;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::label::Label;

pub use dsl::{parse_model, ParseError, ParseErrorKind};
pub use graph::{GraphExport, GraphNode, RuleGroup};

/// Role of a node within a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Function,
    Intermediate,
    Goal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule has no antecedents")]
    EmptyAntecedents,
    #[error("effect `{0}` appears in its own antecedents")]
    SelfCause(Label),
}

/// One authored rule: all antecedents together cause the effect.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CausalRule {
    antecedents: BTreeSet<Label>,
    effect: Label,
}

impl CausalRule {
    pub fn new(
        antecedents: impl IntoIterator<Item = Label>,
        effect: Label,
    ) -> Result<Self, RuleError> {
        let antecedents: BTreeSet<Label> = antecedents.into_iter().collect();
        if antecedents.is_empty() {
            return Err(RuleError::EmptyAntecedents);
        }
        if antecedents.contains(&effect) {
            return Err(RuleError::SelfCause(effect));
        }
        Ok(CausalRule { antecedents, effect })
    }

    pub fn antecedents(&self) -> &BTreeSet<Label> {
        &self.antecedents
    }

    pub fn effect(&self) -> &Label {
        &self.effect
    }
}

/// A user-authored causal model, possibly not yet validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalModel {
    goal: Label,
    declared_intermediates: BTreeSet<Label>,
    rules: Vec<CausalRule>,
}

impl CausalModel {
    pub fn new(goal: Label, rules: Vec<CausalRule>) -> Self {
        CausalModel {
            goal,
            declared_intermediates: BTreeSet::new(),
            rules,
        }
    }

    /// Marks labels as intermediate effects even if no rule produces them.
    pub fn with_intermediates(mut self, labels: impl IntoIterator<Item = Label>) -> Self {
        self.declared_intermediates.extend(labels);
        self
    }

    pub fn goal(&self) -> &Label {
        &self.goal
    }

    pub fn rules(&self) -> &[CausalRule] {
        &self.rules
    }

    pub fn declared_intermediates(&self) -> &BTreeSet<Label> {
        &self.declared_intermediates
    }

    /// Every node with its kind, ordered by label.
    pub fn nodes(&self) -> BTreeMap<Label, NodeKind> {
        let effects: BTreeSet<&Label> = self.rules.iter().map(|r| &r.effect).collect();
        let mut nodes = BTreeMap::new();
        let mut classify = |label: &Label| {
            let kind = if *label == self.goal {
                NodeKind::Goal
            } else if effects.contains(label) || self.declared_intermediates.contains(label) {
                NodeKind::Intermediate
            } else {
                NodeKind::Function
            };
            nodes.insert(label.clone(), kind);
        };
        classify(&self.goal);
        for label in &self.declared_intermediates {
            classify(label);
        }
        for rule in &self.rules {
            rule.antecedents.iter().for_each(&mut classify);
            classify(&rule.effect);
        }
        nodes
    }

    /// The root labels, i.e. the function vocabulary of the model.
    pub fn function_labels(&self) -> BTreeSet<Label> {
        self.nodes()
            .into_iter()
            .filter(|(_, kind)| *kind == NodeKind::Function)
            .map(|(label, _)| label)
            .collect()
    }

    /// Canonical text form; parsing it yields an equal model.
    pub fn to_source(&self) -> String {
        dsl::serialize(self)
    }

    /// Hex SHA-256 of the canonical text form.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_source().as_bytes()))
    }

    pub fn validate(&self) -> ValidationReport {
        match self.compile() {
            Ok(_) => ValidationReport::default(),
            Err(report) => report,
        }
    }

    /// Checks every structural invariant and builds the evaluation plan.
    pub fn compile(&self) -> Result<CompiledModel, ValidationReport> {
        let kinds = self.nodes();
        let labels: Vec<Label> = kinds.keys().cloned().collect();
        let index: BTreeMap<&Label, usize> =
            labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
        let n = labels.len();

        let mut producers: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
        let mut successors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for rule in &self.rules {
            let effect = index[&rule.effect];
            let ants: Vec<usize> = rule.antecedents.iter().map(|a| index[a]).collect();
            for &a in &ants {
                successors[a].insert(effect);
            }
            producers[effect].push(ants);
        }

        let mut violations = Vec::new();
        let goal = index[&self.goal];
        if producers[goal].is_empty() {
            violations.push(Violation::GoalWithoutCause {
                goal: self.goal.clone(),
            });
        }
        for (i, label) in labels.iter().enumerate() {
            if kinds[label] == NodeKind::Intermediate && producers[i].is_empty() {
                violations.push(Violation::UncausedIntermediate {
                    node: label.clone(),
                });
            }
        }
        for cycle in find_cycles(&successors) {
            violations.push(Violation::Cycle {
                path: cycle.into_iter().map(|i| labels[i].clone()).collect(),
            });
        }
        if !violations.is_empty() {
            return Err(ValidationReport { violations });
        }

        let order = topological_order(&successors).expect("acyclic after validation");
        let kind_vec = labels.iter().map(|l| kinds[l]).collect();
        Ok(CompiledModel {
            labels,
            kinds: kind_vec,
            producers,
            order,
            goal,
        })
    }

    /// Computes every node value for the given active functions.
    ///
    /// Labels in `active` that are not function nodes of the model are
    /// ignored. Fails only when the model does not validate.
    pub fn evaluate<'a>(
        &self,
        active: impl IntoIterator<Item = &'a Label>,
    ) -> Result<NodeValuation, ValidationReport> {
        Ok(self.compile()?.evaluate(active))
    }
}

impl fmt::Display for CausalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source())
    }
}

impl std::str::FromStr for CausalModel {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_model(s)
    }
}

/// A single broken invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    GoalWithoutCause { goal: Label },
    UncausedIntermediate { node: Label },
    Cycle { path: Vec<Label> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GoalWithoutCause { goal } => {
                write!(f, "goal without causes: {goal}")
            }
            Violation::UncausedIntermediate { node } => {
                write!(f, "intermediate effect without causes: {node}")
            }
            Violation::Cycle { path } => {
                let joined: Vec<&str> = path.iter().map(Label::as_str).collect();
                write!(f, "cycle: {}", joined.join("→"))
            }
        }
    }
}

/// Outcome of model validation; `ok` iff there are no violations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Validation outcome together with the graph view, as returned to clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationDocument {
    pub v: u32,
    pub ok: bool,
    pub model_hash: String,
    pub violations: Vec<Violation>,
    pub messages: Vec<String>,
    pub graph: GraphExport,
}

impl ValidationDocument {
    pub fn new(model: &CausalModel) -> Self {
        let report = model.validate();
        ValidationDocument {
            v: crate::SCHEMA_VERSION,
            ok: report.is_ok(),
            model_hash: model.content_hash(),
            messages: report.violations.iter().map(ToString::to_string).collect(),
            violations: report.violations,
            graph: model.to_graph_export(),
        }
    }
}

/// Value of every node under one set of active functions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeValuation {
    goal: Label,
    values: BTreeMap<Label, bool>,
}

impl NodeValuation {
    pub fn get(&self, label: &Label) -> Option<bool> {
        self.values.get(label).copied()
    }

    pub fn goal(&self) -> bool {
        self.values[&self.goal]
    }

    pub fn values(&self) -> &BTreeMap<Label, bool> {
        &self.values
    }
}

/// A validated model laid out for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    labels: Vec<Label>,
    kinds: Vec<NodeKind>,
    /// For each node, the antecedent lists of the rules producing it.
    producers: Vec<Vec<Vec<usize>>>,
    order: Vec<usize>,
    goal: usize,
}

impl CompiledModel {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, node: usize) -> &Label {
        &self.labels[node]
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }

    pub fn goal_index(&self) -> usize {
        self.goal
    }

    /// Index of a function node, `None` for unknown or non-root labels.
    pub fn function_index(&self, label: &Label) -> Option<usize> {
        let i = self.labels.binary_search(label).ok()?;
        (self.kinds[i] == NodeKind::Function).then_some(i)
    }

    /// Evaluates with `active[i]` giving the value of root node `i`.
    /// Entries for non-root nodes are ignored.
    pub fn evaluate_indexed(&self, active: &[bool]) -> Vec<bool> {
        let mut values = vec![false; self.labels.len()];
        for &node in &self.order {
            values[node] = if self.producers[node].is_empty() {
                active.get(node).copied().unwrap_or(false)
            } else {
                self.producers[node]
                    .iter()
                    .any(|ants| ants.iter().all(|&a| values[a]))
            };
        }
        values
    }

    pub fn goal_reached(&self, active: &[bool]) -> bool {
        self.evaluate_indexed(active)[self.goal]
    }

    pub fn evaluate<'a>(&self, active: impl IntoIterator<Item = &'a Label>) -> NodeValuation {
        let mut mask = vec![false; self.labels.len()];
        for label in active {
            if let Some(i) = self.function_index(label) {
                mask[i] = true;
            }
        }
        let values = self.evaluate_indexed(&mask);
        NodeValuation {
            goal: self.labels[self.goal].clone(),
            values: self.labels.iter().cloned().zip(values).collect(),
        }
    }
}

/// Kahn's algorithm; `None` if the graph has a cycle.
fn topological_order(successors: &[BTreeSet<usize>]) -> Option<Vec<usize>> {
    let n = successors.len();
    let mut indegree = vec![0usize; n];
    for succ in successors {
        for &s in succ {
            indegree[s] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(node) = queue.pop_front() {
        order.push(node);
        for &s in &successors[node] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                queue.push_back(s);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// One closed walk per non-trivial strongly connected component, starting
/// and ending at the component's smallest node.
fn find_cycles(successors: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    let components = strongly_connected(successors);
    let mut cycles = Vec::new();
    for component in components.into_iter().filter(|c| c.len() > 1) {
        let members: BTreeSet<usize> = component.iter().copied().collect();
        let start = *members.first().expect("non-empty component");
        // Shortest path start -> ... -> start inside the component.
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([start]);
        let mut closing = None;
        'search: while let Some(node) = queue.pop_front() {
            for &next in &successors[node] {
                if !members.contains(&next) {
                    continue;
                }
                if next == start {
                    closing = Some(node);
                    break 'search;
                }
                if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(next) {
                    e.insert(node);
                    queue.push_back(next);
                }
            }
        }
        let mut interior = Vec::new();
        let mut cursor = closing.expect("component members reach each other");
        while cursor != start {
            interior.push(cursor);
            cursor = parent[&cursor];
        }
        interior.reverse();
        let mut walk = vec![start];
        walk.extend(interior);
        walk.push(start);
        cycles.push(walk);
    }
    cycles
}

/// Kosaraju's algorithm, iterative.
fn strongly_connected(successors: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    let n = successors.len();
    let mut visited = vec![false; n];
    let mut finish = Vec::with_capacity(n);
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack: Vec<(usize, Vec<usize>)> =
            vec![(root, successors[root].iter().copied().collect())];
        while let Some((node, pending)) = stack.last_mut() {
            if let Some(next) = pending.pop() {
                if !visited[next] {
                    visited[next] = true;
                    let succ = successors[next].iter().copied().collect();
                    stack.push((next, succ));
                }
            } else {
                finish.push(*node);
                stack.pop();
            }
        }
    }

    let mut predecessors = vec![Vec::new(); n];
    for (from, succ) in successors.iter().enumerate() {
        for &to in succ {
            predecessors[to].push(from);
        }
    }
    let mut assigned = vec![false; n];
    let mut components = Vec::new();
    for &root in finish.iter().rev() {
        if assigned[root] {
            continue;
        }
        assigned[root] = true;
        let mut component = vec![root];
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            for &p in &predecessors[node] {
                if !assigned[p] {
                    assigned[p] = true;
                    component.push(p);
                    stack.push(p);
                }
            }
        }
        components.push(component);
    }
    components
}
