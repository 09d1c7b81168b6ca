//! Structural and feasibility checks over a [`Piece`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mixing;
use crate::model::{
    ConstraintOperand, GroupChild, GroupNode, MixConstraint, MixState, Piece, SelectionConstraint,
    SelectionState, TrackId, LEVEL_CEILING,
};
use crate::selection;

/// Where in a piece an issue was found.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "at", content = "index", rename_all = "snake_case")]
pub enum Location {
    Piece,
    Track(usize),
    /// Child indices from the root down to the offending node.
    GroupTree(Vec<usize>),
    SelectionConstraint(usize),
    MixConstraint(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Piece => f.write_str("piece"),
            Self::Track(i) => write!(f, "tracks[{i}]"),
            Self::GroupTree(path) => {
                f.write_str("group_tree")?;
                for i in path {
                    write!(f, ".children[{i}]")?;
                }
                Ok(())
            }
            Self::SelectionConstraint(i) => write!(f, "selection_constraints[{i}]"),
            Self::MixConstraint(i) => write!(f, "mix_constraints[{i}]"),
        }
    }
}

/// Error codes. The `Ord` impl follows the string codes so that reports sort
/// the same way whichever representation is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCode {
    BalanceUnreachable,
    CardinalityRange,
    DuplicateMember,
    EmptyMembers,
    GroupTreeDuplicate,
    GroupTreeMissing,
    InitialLevelRange,
    InitialStateInfeasible,
    LevelRange,
    MixMembers,
    SampleRate,
    UnknownConstraint,
    UnknownTrack,
    // warnings
    UnreferencedTrack,
    VacuousGroup,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BalanceUnreachable => "BALANCE_UNREACHABLE",
            Self::CardinalityRange => "CARDINALITY_RANGE",
            Self::DuplicateMember => "DUPLICATE_MEMBER",
            Self::EmptyMembers => "EMPTY_MEMBERS",
            Self::GroupTreeDuplicate => "GROUP_TREE_DUPLICATE",
            Self::GroupTreeMissing => "GROUP_TREE_MISSING",
            Self::InitialLevelRange => "INITIAL_LEVEL_RANGE",
            Self::InitialStateInfeasible => "INITIAL_STATE_INFEASIBLE",
            Self::LevelRange => "LEVEL_RANGE",
            Self::MixMembers => "MIX_MEMBERS",
            Self::SampleRate => "SAMPLE_RATE",
            Self::UnknownConstraint => "UNKNOWN_CONSTRAINT",
            Self::UnknownTrack => "UNKNOWN_TRACK",
            Self::UnreferencedTrack => "UNREFERENCED_TRACK",
            Self::VacuousGroup => "VACUOUS_GROUP",
        }
    }
}

impl PartialOrd for IssueCode {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IssueCode {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    pub message: String,
    pub location: Location,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_error(&self, code: IssueCode) -> bool {
        self.errors.iter().any(|e| e.code == code)
    }

    fn error(&mut self, code: IssueCode, location: Location, message: impl Into<String>) {
        self.errors.push(Issue {
            code,
            message: message.into(),
            location,
        });
    }

    fn warn(&mut self, code: IssueCode, location: Location, message: impl Into<String>) {
        self.warnings.push(Issue {
            code,
            message: message.into(),
            location,
        });
    }

    fn finish(mut self) -> Self {
        let key = |i: &Issue| (i.code, i.location.clone());
        self.errors.sort_by_key(key);
        self.warnings.sort_by_key(key);
        self
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("piece is invalid:\n{0}")]
    PieceInvalid(ValidationReport),
}

/// Checks every structural invariant of `piece` and that its initial state
/// satisfies all constraints.
pub fn validate_piece(piece: &Piece) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = piece.tracks.len();

    if piece.sample_rate == 0 {
        report.error(
            IssueCode::SampleRate,
            Location::Piece,
            "sample rate is zero",
        );
    }

    for (i, t) in piece.tracks.iter().enumerate() {
        if t.level_max > LEVEL_CEILING || t.level_min > t.level_max {
            report.error(
                IssueCode::LevelRange,
                Location::Track(i),
                format!(
                    "bounds {}..={} must satisfy min <= max <= {LEVEL_CEILING}",
                    t.level_min, t.level_max
                ),
            );
        } else if !t.admits(t.initial_level) {
            report.error(
                IssueCode::InitialLevelRange,
                Location::Track(i),
                format!(
                    "initial level {} outside {}..={}",
                    t.initial_level, t.level_min, t.level_max
                ),
            );
        }
    }

    check_tree(&piece.group_tree, n, &mut report);

    let mut referenced = vec![false; n];
    let selection_ok: Vec<bool> = piece
        .selection_constraints
        .iter()
        .enumerate()
        .map(|(i, c)| {
            check_selection_constraint(
                i,
                c,
                n,
                piece.selection_constraints.len(),
                &mut referenced,
                &mut report,
            )
        })
        .collect();
    let mix_ok: Vec<bool> = piece
        .mix_constraints
        .iter()
        .enumerate()
        .map(|(i, c)| check_mix_constraint(i, c, piece, &mut referenced, &mut report))
        .collect();

    for (i, seen) in referenced.iter().enumerate() {
        if !seen {
            report.warn(
                IssueCode::UnreferencedTrack,
                Location::Track(i),
                format!("track '{}' appears in no constraint", piece.tracks[i].name),
            );
        }
    }

    // Feasibility of the initial state, over the constraints that are
    // themselves well-formed.
    let (selection, mix) = gather_initial(piece);
    for (i, c) in piece.selection_constraints.iter().enumerate() {
        if selection_ok[i]
            && !selection::constraint_holds(c, &selection, &piece.selection_constraints)
        {
            report.error(
                IssueCode::InitialStateInfeasible,
                Location::SelectionConstraint(i),
                "initial selection violates this constraint",
            );
        }
    }
    for (i, c) in piece.mix_constraints.iter().enumerate() {
        if mix_ok[i] && !mixing::constraint_holds(c, &mix) {
            report.error(
                IssueCode::InitialStateInfeasible,
                Location::MixConstraint(i),
                "initial levels violate this constraint",
            );
        }
    }

    report.finish()
}

/// The session's starting state, gathered from the tracks in id order.
pub fn initial_state(piece: &Piece) -> Result<(SelectionState, MixState), ModelError> {
    let report = validate_piece(piece);
    if !report.is_ok() {
        return Err(ModelError::PieceInvalid(report));
    }
    Ok(gather_initial(piece))
}

fn gather_initial(piece: &Piece) -> (SelectionState, MixState) {
    (
        SelectionState::new(piece.tracks.iter().map(|t| t.initial_selected).collect()),
        MixState::new(piece.tracks.iter().map(|t| t.initial_level).collect()),
    )
}

fn check_tree(root: &GroupNode, n: usize, report: &mut ValidationReport) {
    let mut seen = vec![false; n];
    let mut stack: Vec<(&GroupNode, Vec<usize>)> = vec![(root, Vec::new())];
    while let Some((node, path)) = stack.pop() {
        for (i, child) in node.children.iter().enumerate() {
            let mut child_path = path.clone();
            child_path.push(i);
            match child {
                GroupChild::Track(t) if t.index() >= n => report.error(
                    IssueCode::UnknownTrack,
                    Location::GroupTree(child_path),
                    format!("track {t} does not exist"),
                ),
                GroupChild::Track(t) if seen[t.index()] => report.error(
                    IssueCode::GroupTreeDuplicate,
                    Location::GroupTree(child_path),
                    format!("track {t} appears more than once"),
                ),
                GroupChild::Track(t) => seen[t.index()] = true,
                GroupChild::Group(g) => stack.push((g, child_path)),
            }
        }
    }
    for (i, s) in seen.iter().enumerate() {
        if !s {
            report.error(
                IssueCode::GroupTreeMissing,
                Location::Track(i),
                "track is not placed in the group tree",
            );
        }
    }
}

fn check_selection_constraint(
    index: usize,
    constraint: &SelectionConstraint,
    n: usize,
    constraint_count: usize,
    referenced: &mut [bool],
    report: &mut ValidationReport,
) -> bool {
    let loc = || Location::SelectionConstraint(index);
    let mut ok = true;
    for op in constraint.operands() {
        match op {
            ConstraintOperand::Track(t) if t.index() < n => referenced[t.index()] = true,
            ConstraintOperand::Track(t) => {
                ok = false;
                report.error(
                    IssueCode::UnknownTrack,
                    loc(),
                    format!("track {t} does not exist"),
                );
            }
            ConstraintOperand::Constraint(c) if c >= constraint_count => {
                ok = false;
                report.error(
                    IssueCode::UnknownConstraint,
                    loc(),
                    format!("constraint {c} does not exist"),
                );
            }
            ConstraintOperand::Constraint(_) => {}
        }
    }
    if let SelectionConstraint::GroupCardinality { members, min, max } = constraint {
        if members.is_empty() {
            ok = false;
            report.error(IssueCode::EmptyMembers, loc(), "group has no members");
        } else if min > max || *max as usize > members.len() {
            ok = false;
            report.error(
                IssueCode::CardinalityRange,
                loc(),
                format!(
                    "need 0 <= min ({min}) <= max ({max}) <= member count ({})",
                    members.len()
                ),
            );
        } else if *min == 0 && *max as usize == members.len() {
            report.warn(
                IssueCode::VacuousGroup,
                loc(),
                "bounds 0..=all members never restrict anything",
            );
        }
    }
    ok
}

fn check_mix_constraint(
    index: usize,
    constraint: &MixConstraint,
    piece: &Piece,
    referenced: &mut [bool],
    report: &mut ValidationReport,
) -> bool {
    let loc = || Location::MixConstraint(index);
    let n = piece.tracks.len();
    let tracks = constraint.tracks();
    let mut ok = true;
    for t in &tracks {
        if t.index() < n {
            referenced[t.index()] = true;
        } else {
            ok = false;
            report.error(
                IssueCode::UnknownTrack,
                loc(),
                format!("track {t} does not exist"),
            );
        }
    }
    let distinct: BTreeSet<TrackId> = tracks.iter().copied().collect();
    if distinct.len() < 2 {
        ok = false;
        report.error(
            IssueCode::MixMembers,
            loc(),
            "needs at least two distinct tracks",
        );
    } else if distinct.len() != tracks.len() {
        ok = false;
        report.error(
            IssueCode::DuplicateMember,
            loc(),
            "a track is listed more than once",
        );
    }
    if let (MixConstraint::Balance { members, sum }, true) = (constraint, ok) {
        let lo: u64 = members
            .iter()
            .map(|t| u64::from(piece.tracks[t.index()].level_min))
            .sum();
        let hi: u64 = members
            .iter()
            .map(|t| u64::from(piece.tracks[t.index()].level_max))
            .sum();
        if !(lo..=hi).contains(&u64::from(*sum)) {
            ok = false;
            report.error(
                IssueCode::BalanceUnreachable,
                loc(),
                format!("sum {sum} outside reachable range {lo}..={hi}"),
            );
        }
    }
    ok
}
