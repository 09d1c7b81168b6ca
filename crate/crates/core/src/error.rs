use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::TrackId;

/// Why a solver could not honour a listener action.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "code")]
pub enum SolveError {
    #[error("no feasible state agrees with the requested change")]
    Infeasible,
    #[error("track {track} cannot be set to {level}: composer bounds are {min}..={max}")]
    PinOutOfBounds {
        track: TrackId,
        level: u32,
        min: u32,
        max: u32,
    },
    #[error("action names no tracks")]
    EmptyPins,
    #[error("unknown track {track}")]
    UnknownTrack { track: TrackId },
    #[error("state has {found} entries, piece has {expected} tracks")]
    StateLength { expected: usize, found: usize },
    #[error("instance too large for exhaustive enumeration ({size} candidates, limit {limit})")]
    InstanceTooLarge { size: u64, limit: u64 },
}

impl SolveError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Infeasible => "Infeasible",
            Self::PinOutOfBounds { .. } => "PinOutOfBounds",
            Self::EmptyPins => "EmptyPins",
            Self::UnknownTrack { .. } => "UnknownTrack",
            Self::StateLength { .. } => "StateLength",
            Self::InstanceTooLarge { .. } => "InstanceTooLarge",
        }
    }
}
