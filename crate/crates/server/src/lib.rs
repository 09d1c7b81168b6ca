//! Network host for one piece and one shared listening session.
//!
//! HTTP serves the manifest and the stems exactly as stored in the
//! container; the browser mixes locally. A WebSocket at `/session` carries
//! listener actions in and state events out.

pub mod protocol;
pub mod queue;

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::broadcast::error::RecvError;

use slax_core::container::{self, ContainerError};
use slax_core::{ActionOutcome, Piece, Session};

use protocol::{ClientMessage, ServerMessage, BAD_ACTION};
use queue::SessionHandle;

/// A decoded container ready to serve.
#[derive(Debug, Clone)]
pub struct LoadedPiece {
    pub piece: Piece,
    pub stems: Vec<Vec<u8>>,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Container(#[from] ContainerError),
}

impl LoadedPiece {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ContainerError> {
        let (piece, stems) = container::decode(bytes)?;
        Ok(Self { piece, stems })
    }

    pub fn open(path: &Path) -> Result<Self, LoadError> {
        let bytes = std::fs::read(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::from_bytes(&bytes)?)
    }
}

struct Hosted {
    piece: LoadedPiece,
    session: SessionHandle,
}

/// Router state. `None` means no container was loaded; every piece route
/// then answers 503.
#[derive(Clone)]
pub struct AppState {
    hosted: Option<Arc<Hosted>>,
}

impl AppState {
    /// Starts the session actor for `piece`. Must run inside a tokio runtime.
    pub fn new(piece: Option<LoadedPiece>) -> Self {
        let hosted = piece.map(|piece| {
            // decode already validated the piece, so the initial state exists
            let session = Session::new(piece.piece.clone()).expect("decoded piece is valid");
            Arc::new(Hosted {
                session: SessionHandle::spawn(session),
                piece,
            })
        });
        Self { hosted }
    }

    pub fn session(&self) -> Option<&SessionHandle> {
        self.hosted.as_ref().map(|h| &h.session)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/piece", get(get_piece))
        .route("/stems/{index}", get(get_stem))
        .route("/session", get(session_socket))
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(listener: TcpListener, piece: Option<LoadedPiece>) -> std::io::Result<()> {
    let app = router(AppState::new(piece));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Binds `addr`, reports the bound address on stderr and serves.
pub async fn run(addr: SocketAddr, piece: Option<LoadedPiece>) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    match &piece {
        Some(p) => eprintln!(
            "serving '{}' ({} tracks) on http://{}",
            p.piece.title,
            p.piece.tracks.len(),
            listener.local_addr()?
        ),
        None => eprintln!(
            "no piece loaded; listening on http://{}",
            listener.local_addr()?
        ),
    }
    serve(listener, piece).await
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn not_loaded() -> Response {
    json_response(
        StatusCode::SERVICE_UNAVAILABLE,
        r#"{"code":"NO_PIECE","message":"no container loaded"}"#.to_string(),
    )
}

async fn healthz(State(state): State<AppState>) -> Response {
    let body = serde_json::json!({ "status": "ok", "loaded": state.hosted.is_some() });
    json_response(StatusCode::OK, body.to_string())
}

async fn get_piece(State(state): State<AppState>) -> Response {
    let Some(hosted) = &state.hosted else {
        return not_loaded();
    };
    let stems: Vec<String> = (0..hosted.piece.stems.len())
        .map(|i| format!("/stems/{i}"))
        .collect();
    let body = serde_json::json!({ "manifest": hosted.piece.piece, "stems": stems });
    let text = slax_core::canonical::to_string(&body).expect("manifest holds no floats");
    json_response(StatusCode::OK, text)
}

async fn get_stem(State(state): State<AppState>, UrlPath(index): UrlPath<String>) -> Response {
    let Some(hosted) = &state.hosted else {
        return not_loaded();
    };
    match index
        .parse::<usize>()
        .ok()
        .and_then(|i| hosted.piece.stems.get(i))
    {
        Some(bytes) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, "audio/wav")],
            Body::from(bytes.clone()),
        )
            .into_response(),
        None => json_response(
            StatusCode::NOT_FOUND,
            r#"{"code":"NO_STEM","message":"no stem with that index"}"#.to_string(),
        ),
    }
}

async fn session_socket(State(state): State<AppState>, ws: WebSocketUpgrade) -> Response {
    match &state.hosted {
        Some(hosted) => {
            let session = hosted.session.clone();
            ws.on_upgrade(move |socket| client_loop(socket, session))
        }
        None => not_loaded(),
    }
}

async fn send(socket: &mut WebSocket, msg: &ServerMessage) -> bool {
    socket
        .send(Message::Text(msg.to_json().into()))
        .await
        .is_ok()
}

async fn client_loop(mut socket: WebSocket, session: SessionHandle) {
    let Ok((hello, mut events)) = session.subscribe().await else {
        return;
    };
    if !send(&mut socket, &ServerMessage::Hello(hello)).await {
        return;
    }
    loop {
        tokio::select! {
            incoming = socket.recv() => {
                let text = match incoming {
                    Some(Ok(Message::Text(text))) => text,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                    Some(Ok(Message::Binary(_))) => {
                        let err = ServerMessage::Error {
                            code: BAD_ACTION.into(),
                            message: "expected a text frame".into(),
                        };
                        if !send(&mut socket, &err).await {
                            return;
                        }
                        continue;
                    }
                    Some(Ok(_)) => continue,
                };
                let action = match serde_json::from_str::<ClientMessage>(&text) {
                    Ok(ClientMessage::Action { action }) => action,
                    Err(e) => {
                        let err = ServerMessage::Error {
                            code: BAD_ACTION.into(),
                            message: e.to_string(),
                        };
                        if !send(&mut socket, &err).await {
                            return;
                        }
                        continue;
                    }
                };
                let Ok((outcome, revision)) = session.apply(action).await else {
                    return;
                };
                // Accepted events reach this client through the broadcast.
                if let ActionOutcome::Rejected { reason } = outcome {
                    if !send(&mut socket, &ServerMessage::Rejected { revision, reason }).await {
                        return;
                    }
                }
            }
            event = events.recv() => {
                match event {
                    Ok(msg) => {
                        if !send(&mut socket, &msg).await {
                            return;
                        }
                    }
                    Err(RecvError::Lagged(_)) => {
                        let Ok((hello, fresh)) = session.subscribe().await else {
                            return;
                        };
                        events = fresh;
                        if !send(&mut socket, &ServerMessage::Hello(hello)).await {
                            return;
                        }
                    }
                    Err(RecvError::Closed) => return,
                }
            }
        }
    }
}
