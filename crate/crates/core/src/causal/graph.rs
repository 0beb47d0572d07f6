use serde::{Deserialize, Serialize};

use super::{CausalModel, NodeKind};
use crate::label::Label;
use crate::SCHEMA_VERSION;

/// Renderer-facing view of a model.
///
/// Each rule becomes its own group so AND-bundles (antecedents of one group)
/// stay distinguishable from OR-alternatives (several groups with the same
/// effect). Nodes are sorted by label, groups by rule index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphExport {
    pub v: u32,
    pub goal: Label,
    pub nodes: Vec<GraphNode>,
    pub rule_groups: Vec<RuleGroup>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub label: Label,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleGroup {
    pub rule: usize,
    pub effect: Label,
    pub antecedents: Vec<Label>,
}

impl GraphExport {
    pub fn edge_count(&self) -> usize {
        self.rule_groups.iter().map(|g| g.antecedents.len()).sum()
    }
}

impl CausalModel {
    pub fn to_graph_export(&self) -> GraphExport {
        GraphExport {
            v: SCHEMA_VERSION,
            goal: self.goal().clone(),
            nodes: self
                .nodes()
                .into_iter()
                .map(|(label, kind)| GraphNode { label, kind })
                .collect(),
            rule_groups: self
                .rules()
                .iter()
                .enumerate()
                .map(|(rule, r)| RuleGroup {
                    rule,
                    effect: r.effect().clone(),
                    antecedents: r.antecedents().iter().cloned().collect(),
                })
                .collect(),
        }
    }
}
