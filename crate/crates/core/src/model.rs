//! Domain vocabulary shared by every other module: tracks, the presentation
//! tree, selection and mixing constraints, and the two state vectors.
//!
//! All of these are plain values. Structural checks live in
//! [`crate::validate`]; nothing here enforces invariants on construction, so
//! a `Piece` decoded from an untrusted manifest can be inspected before it is
//! accepted.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Highest level a track may carry.
pub const LEVEL_CEILING: u32 = 100;

/// Dense index of a track within its piece, `0..n`.
///
/// Serialises as a bare integer. Deserialisation also accepts a decimal
/// string, which is how the id arrives when it is a JSON object key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct TrackId(pub u32);

impl<'de> Deserialize<'de> for TrackId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct IdVisitor;

        impl serde::de::Visitor<'_> for IdVisitor {
            type Value = TrackId;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a track index")
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<TrackId, E> {
                u32::try_from(v)
                    .map(TrackId)
                    .map_err(|_| E::custom(format!("track index {v} out of range")))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<TrackId, E> {
                u64::try_from(v)
                    .map_err(|_| E::custom(format!("negative track index {v}")))
                    .and_then(|v| self.visit_u64(v))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<TrackId, E> {
                if v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(E::custom(format!("'{v}' is not a track index")));
                }
                v.parse::<u32>()
                    .map(TrackId)
                    .map_err(|_| E::custom(format!("track index {v} out of range")))
            }
        }

        deserializer.deserialize_any(IdVisitor)
    }
}

impl TrackId {
    #[must_use]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for TrackId {
    fn from(index: usize) -> Self {
        Self(index as u32)
    }
}

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// One stem. Its id is its position in [`Piece::tracks`], which is also the
/// index of its audio payload in the container.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Track {
    pub name: String,
    pub level_min: u32,
    pub level_max: u32,
    pub initial_selected: bool,
    pub initial_level: u32,
}

impl Track {
    /// A track with the full `0..=100` level range.
    pub fn new(name: impl Into<String>, initial_selected: bool, initial_level: u32) -> Self {
        Self {
            name: name.into(),
            level_min: 0,
            level_max: LEVEL_CEILING,
            initial_selected,
            initial_level,
        }
    }

    #[must_use]
    pub fn with_bounds(mut self, level_min: u32, level_max: u32) -> Self {
        self.level_min = level_min;
        self.level_max = level_max;
        self
    }

    pub fn admits(&self, level: u32) -> bool {
        (self.level_min..=self.level_max).contains(&level)
    }
}

/// Presentation tree shown to the listener. Groups here never imply
/// constraints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupNode {
    pub name: String,
    pub children: Vec<GroupChild>,
}

/// A leaf (track index) or a nested group. On the wire a leaf is a bare
/// integer and a group is an object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupChild {
    Track(TrackId),
    Group(GroupNode),
}

impl GroupNode {
    pub fn new(name: impl Into<String>, children: Vec<GroupChild>) -> Self {
        Self {
            name: name.into(),
            children,
        }
    }

    /// Flat group holding `tracks` in order.
    pub fn of_tracks(name: impl Into<String>, tracks: impl IntoIterator<Item = TrackId>) -> Self {
        Self::new(name, tracks.into_iter().map(GroupChild::Track).collect())
    }

    /// Track leaves in depth-first order.
    pub fn leaves(&self) -> Vec<TrackId> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<TrackId>) {
        for child in &self.children {
            match child {
                GroupChild::Track(t) => out.push(*t),
                GroupChild::Group(g) => g.collect_leaves(out),
            }
        }
    }
}

/// Either a track or another selection constraint, by index into
/// [`Piece::selection_constraints`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintOperand {
    Track(TrackId),
    Constraint(usize),
}

impl ConstraintOperand {
    pub fn track(index: usize) -> Self {
        Self::Track(TrackId::from(index))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionConstraint {
    /// `a` and `b` are never active together.
    Exclusion {
        a: ConstraintOperand,
        b: ConstraintOperand,
    },
    /// `antecedent` active forces `consequent` active.
    Implication {
        antecedent: ConstraintOperand,
        consequent: ConstraintOperand,
    },
    /// Between `min` and `max` of `members` are active at once.
    #[serde(rename = "group")]
    GroupCardinality {
        members: Vec<ConstraintOperand>,
        min: u32,
        max: u32,
    },
}

impl SelectionConstraint {
    pub fn exclusion(a: usize, b: usize) -> Self {
        Self::Exclusion {
            a: ConstraintOperand::track(a),
            b: ConstraintOperand::track(b),
        }
    }

    pub fn implication(antecedent: usize, consequent: usize) -> Self {
        Self::Implication {
            antecedent: ConstraintOperand::track(antecedent),
            consequent: ConstraintOperand::track(consequent),
        }
    }

    pub fn group(members: impl IntoIterator<Item = usize>, min: u32, max: u32) -> Self {
        Self::GroupCardinality {
            members: members.into_iter().map(ConstraintOperand::track).collect(),
            min,
            max,
        }
    }

    /// Operands in declaration order.
    pub fn operands(&self) -> Vec<ConstraintOperand> {
        match self {
            Self::Exclusion { a, b } => vec![*a, *b],
            Self::Implication {
                antecedent,
                consequent,
            } => vec![*antecedent, *consequent],
            Self::GroupCardinality { members, .. } => members.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixConstraint {
    /// All members share one level.
    Equality { members: Vec<TrackId> },
    /// `level(higher) >= level(lower)`.
    Inequality { higher: TrackId, lower: TrackId },
    /// Member levels always add up to `sum`.
    Balance { members: Vec<TrackId>, sum: u32 },
}

impl MixConstraint {
    pub fn tracks(&self) -> Vec<TrackId> {
        match self {
            Self::Equality { members } | Self::Balance { members, .. } => members.clone(),
            Self::Inequality { higher, lower } => vec![*higher, *lower],
        }
    }
}

/// A complete composition: tracks, presentation tree and constraints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub title: String,
    pub sample_rate: u32,
    pub tracks: Vec<Track>,
    pub group_tree: GroupNode,
    #[serde(default)]
    pub selection_constraints: Vec<SelectionConstraint>,
    #[serde(default)]
    pub mix_constraints: Vec<MixConstraint>,
}

impl Piece {
    pub fn track_count(&self) -> usize {
        self.tracks.len()
    }

    pub fn track(&self, id: TrackId) -> Option<&Track> {
        self.tracks.get(id.index())
    }

    pub fn track_ids(&self) -> impl Iterator<Item = TrackId> + '_ {
        (0..self.tracks.len()).map(TrackId::from)
    }

    /// Looks a track up by name; first match wins.
    pub fn track_by_name(&self, name: &str) -> Option<TrackId> {
        self.tracks
            .iter()
            .position(|t| t.name == name)
            .map(TrackId::from)
    }
}

/// Which stems are audible, one flag per track.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SelectionState {
    pub active: Vec<bool>,
}

impl SelectionState {
    pub fn new(active: Vec<bool>) -> Self {
        Self { active }
    }

    pub fn all_off(n: usize) -> Self {
        Self {
            active: vec![false; n],
        }
    }

    /// State of `n` tracks with exactly `on` active.
    pub fn with_active(n: usize, on: impl IntoIterator<Item = usize>) -> Self {
        let mut state = Self::all_off(n);
        for i in on {
            state.active[i] = true;
        }
        state
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn is_active(&self, track: TrackId) -> bool {
        self.active[track.index()]
    }
}

/// Per-track integer levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixState {
    pub level: Vec<u32>,
}

impl MixState {
    pub fn new(level: Vec<u32>) -> Self {
        Self { level }
    }

    pub fn len(&self) -> usize {
        self.level.len()
    }

    pub fn is_empty(&self) -> bool {
        self.level.is_empty()
    }

    pub fn get(&self, track: TrackId) -> u32 {
        self.level[track.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_leaves_are_depth_first() {
        let tree = GroupNode::new(
            "root",
            vec![
                GroupChild::Group(GroupNode::of_tracks("a", [TrackId(2), TrackId(0)])),
                GroupChild::Track(TrackId(1)),
            ],
        );
        assert_eq!(tree.leaves(), vec![TrackId(2), TrackId(0), TrackId(1)]);
    }

    #[test]
    fn operand_wire_shape() {
        let json = serde_json::to_string(&SelectionConstraint::Exclusion {
            a: ConstraintOperand::track(0),
            b: ConstraintOperand::Constraint(3),
        })
        .unwrap();
        assert_eq!(
            json,
            r#"{"kind":"exclusion","a":{"track":0},"b":{"constraint":3}}"#
        );
        let group = serde_json::to_string(&SelectionConstraint::group([1, 2], 1, 2)).unwrap();
        assert!(group.starts_with(r#"{"kind":"group""#));
    }

    #[test]
    fn group_child_untagged() {
        let node: GroupNode =
            serde_json::from_str(r#"{"name":"r","children":[0,{"name":"g","children":[1]}]}"#)
                .unwrap();
        assert_eq!(node.leaves(), vec![TrackId(0), TrackId(1)]);
    }
}
