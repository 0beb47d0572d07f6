//! Part → function label assignments for one object.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::ObjectSpec;
use crate::causal::CausalModel;
use crate::label::Label;

/// Whether a bound label is one of the model's function nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FromModelVocabulary,
    Novel,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindingError {
    #[error("unknown part `{0}`")]
    UnknownPart(String),
    #[error("binding is for object `{found}`, expected `{expected}`")]
    ObjectMismatch { expected: String, found: String },
    #[error("empty function label on part `{0}`")]
    EmptyLabel(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BindingWarning {
    /// A label the model does not mention; it cannot affect evaluation.
    NovelLabel { label: Label, parts: Vec<String> },
}

impl fmt::Display for BindingWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindingWarning::NovelLabel { label, parts } => write!(
                f,
                "function `{label}` (on {}) is not in the model and is ignored",
                parts.join(", ")
            ),
        }
    }
}

/// Binding file document: `{"object_id": ..., "entries": {"part": ["label", ...]}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingDoc {
    #[serde(default = "crate::schema_version")]
    pub v: u32,
    pub object_id: String,
    #[serde(default)]
    pub entries: BTreeMap<String, Vec<String>>,
}

impl BindingDoc {
    pub fn new(object_id: impl Into<String>) -> Self {
        BindingDoc {
            v: crate::SCHEMA_VERSION,
            object_id: object_id.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn with(mut self, part: &str, labels: &[&str]) -> Self {
        self.entries
            .insert(part.to_string(), labels.iter().map(|s| s.to_string()).collect());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionBinding {
    object_id: String,
    /// Every part of the object, possibly with an empty label set.
    entries: BTreeMap<String, BTreeSet<Label>>,
    provenance: BTreeMap<Label, Provenance>,
}

impl FunctionBinding {
    pub fn object_id(&self) -> &str {
        &self.object_id
    }

    pub fn entries(&self) -> &BTreeMap<String, BTreeSet<Label>> {
        &self.entries
    }

    pub fn provenance(&self) -> &BTreeMap<Label, Provenance> {
        &self.provenance
    }

    pub fn labels_for(&self, part_id: &str) -> impl Iterator<Item = &Label> {
        self.entries.get(part_id).into_iter().flatten()
    }

    pub fn novel_labels(&self) -> impl Iterator<Item = &Label> {
        self.provenance
            .iter()
            .filter(|(_, p)| **p == Provenance::Novel)
            .map(|(l, _)| l)
    }

    pub fn warnings(&self) -> Vec<BindingWarning> {
        self.novel_labels()
            .map(|label| BindingWarning::NovelLabel {
                label: label.clone(),
                parts: self
                    .entries
                    .iter()
                    .filter(|(_, labels)| labels.contains(label))
                    .map(|(part, _)| part.clone())
                    .collect(),
            })
            .collect()
    }

    /// Copy with `label` removed from every part.
    pub fn without_label(&self, label: &Label) -> FunctionBinding {
        let mut out = self.clone();
        for labels in out.entries.values_mut() {
            labels.remove(label);
        }
        out.provenance.remove(label);
        out
    }
}

/// Binds labels to the parts of `object`, tagging each label by whether the
/// model uses it as a function node.
pub fn bind(
    object: &ObjectSpec,
    model: &CausalModel,
    entries: &BTreeMap<String, Vec<String>>,
) -> Result<FunctionBinding, BindingError> {
    let vocabulary = model.function_labels();
    let mut bound: BTreeMap<String, BTreeSet<Label>> = object
        .parts()
        .iter()
        .map(|p| (p.id.clone(), BTreeSet::new()))
        .collect();
    let mut provenance = BTreeMap::new();
    for (part, labels) in entries {
        let slot = bound
            .get_mut(part)
            .ok_or_else(|| BindingError::UnknownPart(part.clone()))?;
        for raw in labels {
            let label = Label::new(raw).map_err(|_| BindingError::EmptyLabel(part.clone()))?;
            let tag = if vocabulary.contains(&label) {
                Provenance::FromModelVocabulary
            } else {
                Provenance::Novel
            };
            provenance.insert(label.clone(), tag);
            slot.insert(label);
        }
    }
    Ok(FunctionBinding {
        object_id: object.id().to_string(),
        entries: bound,
        provenance,
    })
}

/// [`bind`] from a binding document, checking it targets `object`.
pub fn bind_doc(
    object: &ObjectSpec,
    model: &CausalModel,
    doc: &BindingDoc,
) -> Result<FunctionBinding, BindingError> {
    if doc.object_id != object.id() {
        return Err(BindingError::ObjectMismatch {
            expected: object.id().to_string(),
            found: doc.object_id.clone(),
        });
    }
    bind(object, model, &doc.entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::tests::{conn, part};
    use crate::assembly::{ConnectorKind::*, Primitive::*};
    use crate::causal::parse_model;

    fn flashlight() -> ObjectSpec {
        ObjectSpec::new(
            "flashlight",
            "flashlight",
            vec![
                part("case", "case", vec![conn("bay", Socket, 1.0, &[Insert])]),
                part("head", "head", vec![conn("collar", Thread, 3.0, &[Screw])]),
                part("batteries", "batteries", vec![conn("end", Plug, 1.0, &[Insert])]),
            ],
            vec![],
        )
        .unwrap()
    }

    fn failed_model() -> CausalModel {
        parse_model(
            "goal: light\n\
             \"provide electricity\" AND \"turn electricity into light\" CAUSES \"glowing bulb\"\n\
             \"glowing bulb\" AND \"diffuse light\" CAUSES light\n",
        )
        .unwrap()
    }

    #[test]
    fn novel_label_is_flagged() {
        let doc = BindingDoc::new("flashlight")
            .with("case", &["hold things together"])
            .with("head", &["diffuse light", "Provide Electricity"])
            .with("batteries", &["provide electricity"]);
        let b = bind_doc(&flashlight(), &failed_model(), &doc).unwrap();
        let novel: Vec<&str> = b.novel_labels().map(Label::as_str).collect();
        assert_eq!(novel, ["hold things together"]);
        assert_eq!(
            b.warnings(),
            vec![BindingWarning::NovelLabel {
                label: Label::new("hold things together").unwrap(),
                parts: vec!["case".into()],
            }]
        );
        assert_eq!(b.labels_for("head").count(), 2);
    }

    #[test]
    fn all_empty_binding_is_valid() {
        let b = bind(&flashlight(), &failed_model(), &BTreeMap::new()).unwrap();
        assert_eq!(b.entries().len(), 3);
        assert!(b.entries().values().all(BTreeSet::is_empty));
        assert!(b.warnings().is_empty());
    }

    #[test]
    fn unknown_part_and_wrong_object() {
        let doc = BindingDoc::new("flashlight").with("bulbb", &["x"]);
        assert_eq!(
            bind_doc(&flashlight(), &failed_model(), &doc),
            Err(BindingError::UnknownPart("bulbb".into()))
        );
        let doc = BindingDoc::new("candle");
        assert!(matches!(
            bind_doc(&flashlight(), &failed_model(), &doc),
            Err(BindingError::ObjectMismatch { .. })
        ));
        let doc = BindingDoc::new("flashlight").with("case", &[" "]);
        assert_eq!(
            bind_doc(&flashlight(), &failed_model(), &doc),
            Err(BindingError::EmptyLabel("case".into()))
        );
    }
}
