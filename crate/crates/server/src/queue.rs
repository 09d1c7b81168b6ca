//! The session actor. One task owns the [`Session`]; every mutation arrives
//! through its channel, so actions are applied one at a time in arrival
//! order and broadcasts leave in revision order.

use tokio::sync::{broadcast, mpsc, oneshot};

use slax_core::{ActionOutcome, ListenerAction, Session};

use crate::protocol::{Cause, Changes, ServerMessage, SessionEvent};

const QUEUE_DEPTH: usize = 256;
const BROADCAST_DEPTH: usize = 1024;

enum Command {
    Apply(ListenerAction, oneshot::Sender<(ActionOutcome, u64)>),
    Subscribe(oneshot::Sender<(SessionEvent, broadcast::Receiver<ServerMessage>)>),
}

/// Cheap handle to the session actor.
#[derive(Clone)]
pub struct SessionHandle {
    tx: mpsc::Sender<Command>,
}

/// The actor has stopped; only happens during shutdown.
#[derive(Debug, thiserror::Error)]
#[error("session queue closed")]
pub struct QueueClosed;

impl SessionHandle {
    /// Spawns the actor on the current runtime.
    pub fn spawn(session: Session) -> Self {
        let (tx, rx) = mpsc::channel(QUEUE_DEPTH);
        tokio::spawn(run(session, rx));
        Self { tx }
    }

    /// Applies `action` and returns the outcome with the revision current
    /// after it. Accepted outcomes have already been broadcast when this
    /// returns.
    pub async fn apply(&self, action: ListenerAction) -> Result<(ActionOutcome, u64), QueueClosed> {
        let (reply, rx) = oneshot::channel();
        self.tx
            .send(Command::Apply(action, reply))
            .await
            .map_err(|_| QueueClosed)?;
        rx.await.map_err(|_| QueueClosed)
    }

    /// Current state plus a receiver that sees every later event and none
    /// earlier.
    pub async fn subscribe(
        &self,
    ) -> Result<(SessionEvent, broadcast::Receiver<ServerMessage>), QueueClosed> {
        let (reply, rx) = oneshot::channel();
        self.tx
            .send(Command::Subscribe(reply))
            .await
            .map_err(|_| QueueClosed)?;
        rx.await.map_err(|_| QueueClosed)
    }
}

async fn run(mut session: Session, mut rx: mpsc::Receiver<Command>) {
    let (events, _) = broadcast::channel(BROADCAST_DEPTH);
    while let Some(cmd) = rx.recv().await {
        match cmd {
            Command::Apply(action, reply) => {
                let outcome = session.apply(&action);
                if let ActionOutcome::Accepted {
                    selection_changes,
                    level_changes,
                    ..
                } = &outcome
                {
                    let changes = Changes {
                        selection: selection_changes.clone(),
                        levels: level_changes.clone(),
                    };
                    let event =
                        SessionEvent::from_snapshot(session.snapshot(), Cause::Action, changes);
                    // no subscribers is fine
                    let _ = events.send(ServerMessage::Event(event));
                }
                let _ = reply.send((outcome, session.revision()));
            }
            Command::Subscribe(reply) => {
                let _ = reply.send((
                    SessionEvent::initial(session.snapshot()),
                    events.subscribe(),
                ));
            }
        }
    }
}
