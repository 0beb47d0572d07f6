//! Objects as kits of parts with typed connectors.
//!
//! The state of an assembly is purely topological: which parts have been
//! placed and which connector pairs are joined. Connector pairs are addressed
//! internally by [`Slot`], a (part index, connector index) pair whose order
//! follows the declaration order in the object document.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sharpness of the size-mismatch penalty in [`geometric_compatibility`].
pub const ALIGNMENT_SHARPNESS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectorKind {
    Socket,
    Plug,
    Thread,
    Surface,
}

impl ConnectorKind {
    pub fn complements(self, other: ConnectorKind) -> bool {
        use ConnectorKind::*;
        matches!(
            (self, other),
            (Plug, Socket) | (Socket, Plug) | (Thread, Thread) | (Surface, Surface)
        )
    }
}

/// High-level join operation. Variant order is alphabetical by name, which
/// is the order actions are enumerated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Primitive {
    Connect,
    Insert,
    Screw,
}

impl Primitive {
    pub const ALL: [Primitive; 3] = [Primitive::Connect, Primitive::Insert, Primitive::Screw];

    pub fn as_str(self) -> &'static str {
        match self {
            Primitive::Connect => "connect",
            Primitive::Insert => "insert",
            Primitive::Screw => "screw",
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connector {
    pub id: String,
    pub kind: ConnectorKind,
    pub size: f64,
    pub accepted_primitives: BTreeSet<Primitive>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub id: String,
    pub display_name: String,
    pub connectors: Vec<Connector>,
}

/// `part.connector` address as written in documents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConnectorRef {
    pub part: String,
    pub connector: String,
}

impl ConnectorRef {
    pub fn new(part: impl Into<String>, connector: impl Into<String>) -> Self {
        ConnectorRef {
            part: part.into(),
            connector: connector.into(),
        }
    }
}

impl fmt::Display for ConnectorRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.part, self.connector)
    }
}

impl FromStr for ConnectorRef {
    type Err = AssemblyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('.') {
            Some((part, conn)) if !part.is_empty() && !conn.is_empty() && !conn.contains('.') => {
                Ok(ConnectorRef::new(part, conn))
            }
            _ => Err(AssemblyError::BadConnectorRef(s.to_string())),
        }
    }
}

impl Serialize for ConnectorRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConnectorRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatOverride {
    pub a: ConnectorRef,
    pub b: ConnectorRef,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssemblyError {
    #[error("object has no id")]
    MissingId,
    #[error("duplicate part id `{0}`")]
    DuplicatePart(String),
    #[error("part `{0}` has no connectors")]
    NoConnectors(String),
    #[error("duplicate connector `{0}`")]
    DuplicateConnector(ConnectorRef),
    #[error("invalid id `{0}`: ids must be non-empty and must not contain `.`")]
    BadId(String),
    #[error("connector `{0}` must have a positive finite size")]
    BadSize(ConnectorRef),
    #[error("connector `{0}` accepts no primitives")]
    NoPrimitives(ConnectorRef),
    #[error("malformed connector reference `{0}`")]
    BadConnectorRef(String),
    #[error("unknown connector `{0}`")]
    UnknownConnector(ConnectorRef),
    #[error("compatibility override for `{0}`/`{1}` is outside [0, 1]")]
    BadOverride(ConnectorRef, ConnectorRef),
    #[error("connector {0} is already joined")]
    ConnectorOccupied(String),
    #[error("both ends of an action are on the same part")]
    SamePart,
    #[error("parts are already joined to each other")]
    AlreadyJoined,
    #[error("action joins two unplaced parts to a non-empty assembly")]
    Detached,
    #[error("primitive `{0}` is not accepted by both connectors")]
    PrimitiveNotAccepted(Primitive),
}

/// Position of a connector inside an object: (part index, connector index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub part: usize,
    pub connector: usize,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}.{}", self.part, self.connector)
    }
}

/// An object kit. Construct through [`ObjectSpec::new`] or deserialization,
/// both of which check the document invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObjectDoc", into = "ObjectDoc")]
pub struct ObjectSpec {
    id: String,
    display_name: String,
    parts: Vec<Part>,
    compat_overrides: Vec<CompatOverride>,
    override_table: BTreeMap<(Slot, Slot), f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ObjectDoc {
    #[serde(default = "crate::schema_version")]
    v: u32,
    id: String,
    display_name: String,
    parts: Vec<Part>,
    #[serde(default)]
    compat_overrides: Vec<CompatOverride>,
}

impl TryFrom<ObjectDoc> for ObjectSpec {
    type Error = AssemblyError;

    fn try_from(doc: ObjectDoc) -> Result<Self, Self::Error> {
        ObjectSpec::new(doc.id, doc.display_name, doc.parts, doc.compat_overrides)
    }
}

impl From<ObjectSpec> for ObjectDoc {
    fn from(o: ObjectSpec) -> Self {
        ObjectDoc {
            v: crate::SCHEMA_VERSION,
            id: o.id,
            display_name: o.display_name,
            parts: o.parts,
            compat_overrides: o.compat_overrides,
        }
    }
}

fn valid_id(id: &str) -> bool {
    !id.trim().is_empty() && !id.contains('.')
}

impl ObjectSpec {
    pub fn new(
        id: impl Into<String>,
        display_name: impl Into<String>,
        parts: Vec<Part>,
        compat_overrides: Vec<CompatOverride>,
    ) -> Result<Self, AssemblyError> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(AssemblyError::MissingId);
        }
        let mut seen_parts = HashSet::new();
        for part in &parts {
            if !valid_id(&part.id) {
                return Err(AssemblyError::BadId(part.id.clone()));
            }
            if !seen_parts.insert(part.id.as_str()) {
                return Err(AssemblyError::DuplicatePart(part.id.clone()));
            }
            if part.connectors.is_empty() {
                return Err(AssemblyError::NoConnectors(part.id.clone()));
            }
            let mut seen_conns = HashSet::new();
            for c in &part.connectors {
                let cref = ConnectorRef::new(&part.id, &c.id);
                if !valid_id(&c.id) {
                    return Err(AssemblyError::BadId(c.id.clone()));
                }
                if !seen_conns.insert(c.id.as_str()) {
                    return Err(AssemblyError::DuplicateConnector(cref));
                }
                if !(c.size.is_finite() && c.size > 0.0) {
                    return Err(AssemblyError::BadSize(cref));
                }
                if c.accepted_primitives.is_empty() {
                    return Err(AssemblyError::NoPrimitives(cref));
                }
            }
        }

        let mut object = ObjectSpec {
            id,
            display_name: display_name.into(),
            parts,
            compat_overrides: Vec::new(),
            override_table: BTreeMap::new(),
        };
        for o in &compat_overrides {
            let a = object
                .slot(&o.a)
                .ok_or_else(|| AssemblyError::UnknownConnector(o.a.clone()))?;
            let b = object
                .slot(&o.b)
                .ok_or_else(|| AssemblyError::UnknownConnector(o.b.clone()))?;
            if !(0.0..=1.0).contains(&o.p) {
                return Err(AssemblyError::BadOverride(o.a.clone(), o.b.clone()));
            }
            object.override_table.insert((a.min(b), a.max(b)), o.p);
        }
        object.compat_overrides = compat_overrides;
        Ok(object)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn display_name(&self) -> &str {
        &self.display_name
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn compat_overrides(&self) -> &[CompatOverride] {
        &self.compat_overrides
    }

    pub fn part_index(&self, id: &str) -> Option<usize> {
        self.parts.iter().position(|p| p.id == id)
    }

    pub fn slot(&self, r: &ConnectorRef) -> Option<Slot> {
        let part = self.part_index(&r.part)?;
        let connector = self.parts[part]
            .connectors
            .iter()
            .position(|c| c.id == r.connector)?;
        Some(Slot { part, connector })
    }

    pub fn connector(&self, slot: Slot) -> &Connector {
        &self.parts[slot.part].connectors[slot.connector]
    }

    pub fn connector_ref(&self, slot: Slot) -> ConnectorRef {
        let part = &self.parts[slot.part];
        ConnectorRef::new(&part.id, &part.connectors[slot.connector].id)
    }

    /// All connector slots in declaration order.
    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        self.parts.iter().enumerate().flat_map(|(part, p)| {
            (0..p.connectors.len()).map(move |connector| Slot { part, connector })
        })
    }

    /// Success probability of joining two connectors: the override if one
    /// is declared for the pair, the geometric estimate otherwise.
    pub fn compatibility(&self, a: Slot, b: Slot) -> f64 {
        let key = (a.min(b), a.max(b));
        match self.override_table.get(&key) {
            Some(&p) => p,
            None => geometric_compatibility(self.connector(a), self.connector(b)),
        }
    }

    /// Builds an action from document-level references, checking that both
    /// connectors exist, lie on different parts and accept the primitive.
    pub fn action(
        &self,
        primitive: Primitive,
        from: &ConnectorRef,
        to: &ConnectorRef,
    ) -> Result<AssemblyAction, AssemblyError> {
        let a = self
            .slot(from)
            .ok_or_else(|| AssemblyError::UnknownConnector(from.clone()))?;
        let b = self
            .slot(to)
            .ok_or_else(|| AssemblyError::UnknownConnector(to.clone()))?;
        if a.part == b.part {
            return Err(AssemblyError::SamePart);
        }
        let accepts = |s: Slot| self.connector(s).accepted_primitives.contains(&primitive);
        if !(accepts(a) && accepts(b)) {
            return Err(AssemblyError::PrimitiveNotAccepted(primitive));
        }
        Ok(AssemblyAction::new(primitive, a, b))
    }

    /// Every action that can be attempted from `state`, ordered by
    /// (primitive, from, to).
    pub fn applicable_actions(&self, state: &AssemblyState) -> Vec<AssemblyAction> {
        let free: Vec<Slot> = self.slots().filter(|s| !state.is_occupied(*s)).collect();
        let anchored = |a: Slot, b: Slot| {
            state.placed.is_empty()
                || state.placed.contains(&a.part)
                || state.placed.contains(&b.part)
        };
        let mut actions = Vec::new();
        for primitive in Primitive::ALL {
            let accepting: Vec<Slot> = free
                .iter()
                .copied()
                .filter(|s| self.connector(*s).accepted_primitives.contains(&primitive))
                .collect();
            for (i, &from) in accepting.iter().enumerate() {
                for &to in &accepting[i + 1..] {
                    if from.part == to.part
                        || !anchored(from, to)
                        || state.parts_joined(from.part, to.part)
                        || self.compatibility(from, to) <= 0.0
                    {
                        continue;
                    }
                    actions.push(AssemblyAction::new(primitive, from, to));
                }
            }
        }
        actions
    }

    /// Parts in the largest connected component of the joint graph. Ties go
    /// to the component holding the lexicographically smallest part id.
    pub fn assembled_component(&self, state: &AssemblyState) -> BTreeSet<usize> {
        let mut best: Option<(BTreeSet<usize>, &str)> = None;
        let mut seen = BTreeSet::new();
        for &start in &state.placed {
            if !seen.insert(start) {
                continue;
            }
            let mut component = BTreeSet::from([start]);
            let mut stack = vec![start];
            while let Some(part) = stack.pop() {
                for j in &state.joints {
                    let other = if j.a.part == part {
                        j.b.part
                    } else if j.b.part == part {
                        j.a.part
                    } else {
                        continue;
                    };
                    if component.insert(other) {
                        seen.insert(other);
                        stack.push(other);
                    }
                }
            }
            let smallest = component
                .iter()
                .map(|&p| self.parts[p].id.as_str())
                .min()
                .expect("component is non-empty");
            let better = match &best {
                None => true,
                Some((b, b_smallest)) => {
                    component.len() > b.len()
                        || (component.len() == b.len() && smallest < *b_smallest)
                }
            };
            if better {
                best = Some((component, smallest));
            }
        }
        best.map(|(c, _)| c).unwrap_or_default()
    }

    /// Part ids for a set of part indices, sorted.
    pub fn part_ids(&self, parts: &BTreeSet<usize>) -> Vec<String> {
        let mut ids: Vec<String> = parts.iter().map(|&p| self.parts[p].id.clone()).collect();
        ids.sort();
        ids
    }

    /// `"<primitive> <part A> (<connector>) to <part B> (<connector>)"`.
    pub fn render_action(&self, action: &AssemblyAction) -> String {
        let side = |s: Slot| {
            format!(
                "{} ({})",
                self.parts[s.part].display_name,
                self.connector(s).id
            )
        };
        format!(
            "{} {} to {}",
            action.primitive,
            side(action.from),
            side(action.to)
        )
    }
}

/// Geometric alignment estimate, symmetric and within [0, 1].
///
/// Zero for non-complementary kinds or disjoint primitive sets, otherwise
/// `exp(-k * |s1 - s2| / max(s1, s2))`.
pub fn geometric_compatibility(a: &Connector, b: &Connector) -> f64 {
    if !a.kind.complements(b.kind) || a.accepted_primitives.is_disjoint(&b.accepted_primitives) {
        return 0.0;
    }
    let mismatch = (a.size - b.size).abs() / a.size.max(b.size);
    (-ALIGNMENT_SHARPNESS * mismatch).exp()
}

/// One join of two connectors, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Joint {
    pub a: Slot,
    pub b: Slot,
    pub primitive: Primitive,
}

/// An attempt to join two free connectors. `from < to` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AssemblyAction {
    pub primitive: Primitive,
    pub from: Slot,
    pub to: Slot,
}

impl AssemblyAction {
    pub fn new(primitive: Primitive, a: Slot, b: Slot) -> Self {
        AssemblyAction {
            primitive,
            from: a.min(b),
            to: a.max(b),
        }
    }
}

/// Placed parts plus the joints between them. Equal states compare equal
/// regardless of the order actions were applied in.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AssemblyState {
    placed: BTreeSet<usize>,
    joints: BTreeSet<Joint>,
}

impl AssemblyState {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn placed_parts(&self) -> &BTreeSet<usize> {
        &self.placed
    }

    pub fn joints(&self) -> &BTreeSet<Joint> {
        &self.joints
    }

    pub fn is_empty(&self) -> bool {
        self.placed.is_empty()
    }

    pub fn is_occupied(&self, slot: Slot) -> bool {
        self.joints.iter().any(|j| j.a == slot || j.b == slot)
    }

    pub fn parts_joined(&self, p: usize, q: usize) -> bool {
        self.joints
            .iter()
            .any(|j| (j.a.part == p && j.b.part == q) || (j.a.part == q && j.b.part == p))
    }

    /// The successor after `action` succeeds; `self` is left untouched.
    pub fn apply(&self, action: &AssemblyAction) -> Result<AssemblyState, AssemblyError> {
        let (a, b) = (action.from.min(action.to), action.from.max(action.to));
        if a.part == b.part {
            return Err(AssemblyError::SamePart);
        }
        for s in [a, b] {
            if self.is_occupied(s) {
                return Err(AssemblyError::ConnectorOccupied(s.to_string()));
            }
        }
        if self.parts_joined(a.part, b.part) {
            return Err(AssemblyError::AlreadyJoined);
        }
        if !self.placed.is_empty() && !self.placed.contains(&a.part) && !self.placed.contains(&b.part)
        {
            return Err(AssemblyError::Detached);
        }
        let mut next = self.clone();
        next.placed.insert(a.part);
        next.placed.insert(b.part);
        next.joints.insert(Joint {
            a,
            b,
            primitive: action.primitive,
        });
        Ok(next)
    }

    /// Document form using part ids and connector references.
    pub fn describe(&self, object: &ObjectSpec) -> StateSummary {
        StateSummary {
            placed_parts: object.part_ids(&self.placed),
            joints: self
                .joints
                .iter()
                .map(|j| JointSummary {
                    a: object.connector_ref(j.a),
                    b: object.connector_ref(j.b),
                    primitive: j.primitive,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSummary {
    pub placed_parts: Vec<String>,
    pub joints: Vec<JointSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointSummary {
    pub a: ConnectorRef,
    pub b: ConnectorRef,
    pub primitive: Primitive,
}
