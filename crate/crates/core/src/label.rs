use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A node label in a causal model: a function, an intermediate effect or the goal.
///
/// Labels are typed by people, so identity ignores surrounding whitespace and
/// letter case. The stored text is the trimmed, lowercased form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

/// Function labels are ordinary labels that happen to sit at the roots.
pub type FunctionLabel = Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("label is empty after trimming")]
pub struct EmptyLabel;

impl Label {
    pub fn new(text: &str) -> Result<Self, EmptyLabel> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(EmptyLabel);
        }
        Ok(Label(trimmed.to_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Label {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::str::FromStr for Label {
    type Err = EmptyLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::new(s)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Label::new(&raw).map_err(serde::de::Error::custom)
    }
}
