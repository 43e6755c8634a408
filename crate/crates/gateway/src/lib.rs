//! Network edge: `POST /skill` for transcribed utterances and `GET /ws` for
//! pushing render messages to browser clients.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mltv_core::protocol::{ClientMessage, RenderMessage, SkillRequest};
use mltv_core::service::{PushError, PushSink, Service, SubscribeError};
use serde::Deserialize;
use tokio::net::TcpListener;
use tokio::sync::mpsc;

/// Close codes sent on the push channel.
pub mod close {
    pub const BAD_TOKEN: u16 = 4401;
    pub const UNKNOWN_SESSION: u16 = 4404;
    /// The client's queue filled up and it was dropped.
    pub const TOO_SLOW: u16 = 4408;
}

#[derive(Clone)]
struct AppState {
    service: Arc<Service>,
    push_queue: usize,
}

/// Routes for `service`. Each push client gets a queue of `push_queue`
/// messages; a client that lets it fill up is disconnected.
pub fn router(service: Arc<Service>, push_queue: usize) -> Router {
    Router::new()
        .route("/skill", post(skill))
        .route("/ws", get(ws))
        .with_state(AppState {
            service,
            push_queue: push_queue.max(1),
        })
}

pub async fn serve(listener: TcpListener, service: Arc<Service>, push_queue: usize) -> std::io::Result<()> {
    axum::serve(listener, router(service, push_queue)).await
}

fn bad_request(message: String) -> Response {
    (StatusCode::BAD_REQUEST, Json(serde_json::json!({ "error": message }))).into_response()
}

// The body is decoded by hand so that every malformed body is a 400.
async fn skill(State(app): State<AppState>, body: Bytes) -> Response {
    let value: serde_json::Value = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return bad_request(e.to_string()),
    };
    // serde would also take a positional array for the struct
    if !value.is_object() {
        return bad_request("expected a JSON object".into());
    }
    let request: SkillRequest = match serde_json::from_value(value) {
        Ok(r) => r,
        Err(e) => return bad_request(e.to_string()),
    };
    let service = app.service.clone();
    match tokio::task::spawn_blocking(move || service.handle_skill_request(&request)).await {
        Ok(response) => Json(response).into_response(),
        Err(e) => {
            tracing::error!("skill handler failed: {e}");
            StatusCode::INTERNAL_SERVER_ERROR.into_response()
        }
    }
}

#[derive(Debug, Deserialize)]
struct WsParams {
    session: Option<String>,
    token: Option<String>,
}

struct ChannelSink(mpsc::Sender<String>);

impl PushSink for ChannelSink {
    fn try_push(&self, message: &RenderMessage) -> Result<(), PushError> {
        self.0.try_send(message.to_json()).map_err(|e| match e {
            mpsc::error::TrySendError::Full(_) => PushError::Full,
            mpsc::error::TrySendError::Closed(_) => PushError::Closed,
        })
    }
}

async fn ws(State(app): State<AppState>, Query(params): Query<WsParams>, upgrade: WebSocketUpgrade) -> Response {
    upgrade.on_upgrade(move |socket| push_channel(socket, app, params))
}

async fn close_with(mut socket: WebSocket, code: u16, reason: &'static str) {
    let frame = CloseFrame {
        code,
        reason: reason.into(),
    };
    let _ = socket.send(Message::Close(Some(frame))).await;
}

async fn push_channel(mut socket: WebSocket, app: AppState, params: WsParams) {
    let session_id = params.session.unwrap_or_default();
    let token = params.token.unwrap_or_default();
    let (tx, mut rx) = mpsc::channel::<String>(app.push_queue);

    let subscription = match app.service.subscribe(&session_id, &token, Arc::new(ChannelSink(tx))) {
        Ok(s) => s,
        Err(SubscribeError::UnknownSession) => {
            return close_with(socket, close::UNKNOWN_SESSION, "unknown session").await
        }
        Err(SubscribeError::BadToken) => return close_with(socket, close::BAD_TOKEN, "bad token").await,
        Err(SubscribeError::SnapshotRejected(_)) => {
            return close_with(socket, close::TOO_SLOW, "client too slow").await
        }
    };
    tracing::debug!(session = %session_id, id = subscription.id, "push client subscribed");

    loop {
        tokio::select! {
            outgoing = rx.recv() => match outgoing {
                Some(json) => {
                    if socket.send(Message::Text(json.into())).await.is_err() {
                        break;
                    }
                }
                // the service only drops a live sink when its queue is full
                None => {
                    tracing::info!(session = %session_id, "dropping slow push client");
                    close_with(socket, close::TOO_SLOW, "client too slow").await;
                    return;
                }
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    match serde_json::from_str::<ClientMessage>(text.as_str()) {
                        Ok(ClientMessage::Utterance { text }) => {
                            let service = app.service.clone();
                            let session = session_id.clone();
                            let _ = tokio::task::spawn_blocking(move || {
                                service.handle_utterance(&session, &text)
                            })
                            .await;
                        }
                        Err(e) => tracing::warn!(session = %session_id, "ignoring client message: {e}"),
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
    app.service.unsubscribe(&subscription);
}
