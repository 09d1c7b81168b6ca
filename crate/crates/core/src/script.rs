//! Render scripts: listener actions stamped with frame offsets, replayed
//! through a [`Session`] to produce a [`StateTimeline`].
//!
//! ```json
//! {"length_frames": 88200,
//!  "actions": [{"frame": 0, "action": {"kind": "toggle_tracks", "pins": {"0": true}}}]}
//! ```
//!
//! Both keys are optional. An empty file is an empty script.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::SolveError;
use crate::model::Piece;
use crate::render::StateTimeline;
use crate::session::{ActionOutcome, ListenerAction, Session};
use crate::validate::ModelError;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderScript {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_frames: Option<u64>,
    #[serde(default)]
    pub actions: Vec<ScriptStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptStep {
    pub frame: u64,
    pub action: ListenerAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("script is not valid: {0}")]
    Syntax(String),
    #[error("action {index} at frame {frame} comes before the previous action")]
    Order { index: usize, frame: u64 },
    #[error("action {index} at frame {frame} was rejected: {reason}")]
    Rejected {
        index: usize,
        frame: u64,
        reason: SolveError,
    },
    #[error(transparent)]
    Piece(#[from] ModelError),
}

impl RenderScript {
    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_json::from_str(text).map_err(|e| ScriptError::Syntax(e.to_string()))
    }

    /// Replays the actions from the piece's initial state. Actions sharing a
    /// frame collapse into one timeline entry holding the state after the
    /// last of them.
    pub fn replay(&self, piece: &Piece) -> Result<StateTimeline, ScriptError> {
        let mut session = Session::new(piece.clone())?;
        let mut timeline =
            StateTimeline::constant(session.selection().clone(), session.mix().clone());
        for (index, step) in self.actions.iter().enumerate() {
            let last = timeline.entries.last().expect("timeline starts non-empty");
            if step.frame < last.frame {
                return Err(ScriptError::Order {
                    index,
                    frame: step.frame,
                });
            }
            if let ActionOutcome::Rejected { reason } = session.apply(&step.action) {
                return Err(ScriptError::Rejected {
                    index,
                    frame: step.frame,
                    reason,
                });
            }
            let (selection, mix) = (session.selection().clone(), session.mix().clone());
            let last = timeline.entries.last_mut().expect("non-empty");
            if last.frame == step.frame {
                last.selection = selection;
                last.mix = mix;
            } else {
                timeline.push(step.frame, selection, mix);
            }
        }
        Ok(timeline)
    }
}
