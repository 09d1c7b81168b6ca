//! Live playback session: applies listener actions through the two solvers
//! and keeps `(selection, mix)` feasible at every revision.
//!
//! Selection and levels are solved independently of each other.
//! [`lint_crossed_constraints`] reports the one known way this lets a
//! listener defeat a selection constraint.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::mixing::{solve_levels, LevelChange, PinnedLevel};
use crate::model::{
    ConstraintOperand, MixState, Piece, SelectionConstraint, SelectionState, TrackId,
};
use crate::selection::{solve_selection, PinnedSelection};
use crate::validate::{initial_state, ModelError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transport {
    pub playing: bool,
    pub position_frames: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ListenerAction {
    ToggleTracks { pins: PinnedSelection },
    SetLevels { pins: PinnedLevel },
    Play,
    Pause,
    Seek { frames: u64 },
}

impl ListenerAction {
    pub fn toggle(track: TrackId, active: bool) -> Self {
        Self::ToggleTracks {
            pins: PinnedSelection::single(track, active),
        }
    }

    pub fn set_level(track: TrackId, level: u32) -> Self {
        Self::SetLevels {
            pins: PinnedLevel::single(track, level),
        }
    }
}

/// One automatic selection change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionChange {
    pub track: TrackId,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ActionOutcome {
    Accepted {
        revision: u64,
        selection_changes: Vec<SelectionChange>,
        level_changes: Vec<LevelChange>,
    },
    Rejected {
        reason: SolveError,
    },
}

impl ActionOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Self::Accepted { .. })
    }
}

/// Everything a client needs to mirror the session.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Snapshot {
    pub revision: u64,
    pub selection: SelectionState,
    pub mix: MixState,
    pub transport: Transport,
}

#[derive(Debug, Clone)]
pub struct Session {
    piece: Piece,
    selection: SelectionState,
    mix: MixState,
    revision: u64,
    transport: Transport,
}

impl Session {
    /// Starts a session at the piece's initial state, revision 0.
    pub fn new(piece: Piece) -> Result<Self, ModelError> {
        let (selection, mix) = initial_state(&piece)?;
        Ok(Self {
            piece,
            selection,
            mix,
            revision: 0,
            transport: Transport::default(),
        })
    }

    pub fn piece(&self) -> &Piece {
        &self.piece
    }

    pub fn selection(&self) -> &SelectionState {
        &self.selection
    }

    pub fn mix(&self) -> &MixState {
        &self.mix
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn transport(&self) -> Transport {
        self.transport
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            revision: self.revision,
            selection: self.selection.clone(),
            mix: self.mix.clone(),
            transport: self.transport,
        }
    }

    /// Applies one action. State changes only when the outcome is accepted.
    pub fn apply(&mut self, action: &ListenerAction) -> ActionOutcome {
        let mut selection_changes = Vec::new();
        let mut level_changes = Vec::new();
        match action {
            ListenerAction::ToggleTracks { pins } => {
                match solve_selection(&self.piece.selection_constraints, &self.selection, pins) {
                    Ok(sol) => {
                        selection_changes = sol
                            .changed
                            .iter()
                            .map(|&(track, active)| SelectionChange { track, active })
                            .collect();
                        self.selection = sol.state;
                    }
                    Err(reason) => return ActionOutcome::Rejected { reason },
                }
            }
            ListenerAction::SetLevels { pins } => {
                match solve_levels(&self.piece, &self.mix, pins) {
                    Ok(sol) => {
                        level_changes = sol.changed;
                        self.mix = sol.state;
                    }
                    Err(reason) => return ActionOutcome::Rejected { reason },
                }
            }
            ListenerAction::Play => self.transport.playing = true,
            ListenerAction::Pause => self.transport.playing = false,
            ListenerAction::Seek { frames } => self.transport.position_frames = *frames,
        }
        self.revision += 1;
        ActionOutcome::Accepted {
            revision: self.revision,
            selection_changes,
            level_changes,
        }
    }
}

/// Free-function form of [`Session::apply`].
pub fn apply_action(session: &mut Session, action: &ListenerAction) -> ActionOutcome {
    session.apply(action)
}

pub const AUDIBILITY_HOLE: &str = "AUDIBILITY_HOLE";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionWarning {
    pub track: TrackId,
    pub rule: String,
    pub explanation: String,
}

/// Tracks a selection constraint can force on while their level may still
/// reach zero. Only direct track operands are considered: implication
/// consequents and members of groups with `min >= 1`.
pub fn lint_crossed_constraints(piece: &Piece) -> Vec<CollisionWarning> {
    let mut forced = BTreeSet::new();
    for c in &piece.selection_constraints {
        match c {
            SelectionConstraint::Implication {
                consequent: ConstraintOperand::Track(t),
                ..
            } => {
                forced.insert(*t);
            }
            SelectionConstraint::GroupCardinality { members, min, .. } if *min >= 1 => {
                forced.extend(members.iter().filter_map(|m| match m {
                    ConstraintOperand::Track(t) => Some(*t),
                    ConstraintOperand::Constraint(_) => None,
                }));
            }
            _ => {}
        }
    }
    forced
        .into_iter()
        .filter(|t| piece.track(*t).is_some_and(|track| track.level_min == 0))
        .map(|t| CollisionWarning {
            track: t,
            rule: AUDIBILITY_HOLE.to_string(),
            explanation: format!(
                "'{}' can be forced to play but its level may be lowered to 0, silencing it",
                piece.tracks[t.index()].name
            ),
        })
        .collect()
}
