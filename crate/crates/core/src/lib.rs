//! Interactive multi-stem music.
//!
//! A piece bundles independently recorded stems with composer rules over
//! which stems may play together ([`model::SelectionConstraint`]) and how
//! loud they may be ([`model::MixConstraint`]). When a listener toggles a
//! stem or moves a fader, the solvers pin that change and move the rest of
//! the state as little as possible to keep every rule satisfied, or reject
//! the change when no such state exists.
//!
//! - [`model`], [`validate`]: the domain types and authoring checks.
//! - [`selection`], [`mixing`]: nearest-state solvers; [`oracle`] holds
//!   exhaustive counterparts used to check them.
//! - [`container`]: the `.slax` file format; [`wav`] the stem payloads.
//! - [`session`]: the live state machine and crossed-constraint lint.
//! - [`render`], [`script`]: deterministic offline mixdown.

pub mod canonical;
pub mod container;
pub mod error;
pub mod fixtures;
pub mod mixing;
pub mod model;
pub mod oracle;
pub mod render;
pub mod script;
pub mod selection;
pub mod session;
pub mod validate;
pub mod wav;

pub use error::SolveError;
pub use model::{
    ConstraintOperand, GroupChild, GroupNode, MixConstraint, MixState, Piece, SelectionConstraint,
    SelectionState, Track, TrackId,
};
pub use session::{ActionOutcome, ListenerAction, Session};
pub use validate::{validate_piece, ValidationReport};
