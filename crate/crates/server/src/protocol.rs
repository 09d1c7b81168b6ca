//! WebSocket message shapes. Every frame is a text frame holding one JSON
//! object in the canonical dialect used by the container manifest.

use serde::{Deserialize, Serialize};

use slax_core::mixing::LevelChange;
use slax_core::session::{SelectionChange, Snapshot, Transport};
use slax_core::{ListenerAction, MixState, SelectionState, SolveError};

/// Error code sent when a client frame cannot be parsed as an action.
pub const BAD_ACTION: &str = "BAD_ACTION";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Action { action: ListenerAction },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cause {
    Initial,
    Action,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Changes {
    pub selection: Vec<SelectionChange>,
    pub levels: Vec<LevelChange>,
}

/// Full state after some revision, with what caused it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub revision: u64,
    pub selection: SelectionState,
    pub mix: MixState,
    pub transport: Transport,
    pub cause: Cause,
    pub changes: Changes,
}

impl SessionEvent {
    pub fn initial(snapshot: Snapshot) -> Self {
        Self::from_snapshot(snapshot, Cause::Initial, Changes::default())
    }

    pub fn from_snapshot(snapshot: Snapshot, cause: Cause, changes: Changes) -> Self {
        Self {
            revision: snapshot.revision,
            selection: snapshot.selection,
            mix: snapshot.mix,
            transport: snapshot.transport,
            cause,
            changes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    /// First message on every connection, and again after a client falls
    /// too far behind the broadcast and has to resynchronise.
    Hello(SessionEvent),
    Event(SessionEvent),
    /// Sent only to the client whose action was refused. `revision` is the
    /// unchanged current revision.
    Rejected {
        revision: u64,
        reason: SolveError,
    },
    Error {
        code: String,
        message: String,
    },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        slax_core::canonical::to_string(self).expect("server messages hold no floats")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use slax_core::TrackId;

    #[test]
    fn action_frame_shape() {
        let msg: ClientMessage = serde_json::from_str(
            r#"{"type":"action","action":{"kind":"toggle_tracks","pins":{"0":true}}}"#,
        )
        .unwrap();
        assert_eq!(
            msg,
            ClientMessage::Action {
                action: ListenerAction::toggle(TrackId(0), true)
            }
        );
        assert!(serde_json::from_str::<ClientMessage>("{}").is_err());
    }

    #[test]
    fn rejection_is_canonical() {
        let msg = ServerMessage::Rejected {
            revision: 4,
            reason: SolveError::Infeasible,
        };
        assert_eq!(
            msg.to_json(),
            r#"{"reason":{"code":"Infeasible"},"revision":4,"type":"rejected"}"#
        );
    }
}
