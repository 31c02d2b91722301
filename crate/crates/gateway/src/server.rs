//! HTTP and WebSocket routes.

use std::convert::Infallible;
use std::future::Future;

use axum::body::{Body, Bytes};
use axum::extract::ws::rejection::WebSocketUpgradeRejection;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::value::RawValue;
use tokio::net::TcpListener;

use crate::api::{CommandRequest, Rejection, Reply, SnapshotBody};
use crate::driver::Handle;

pub const DEFAULT_PORT: u16 = 7878;
const DEFAULT_TAIL: usize = 50;

pub fn router(handle: Handle) -> Router {
    Router::new()
        .route("/snapshot", get(snapshot))
        .route("/command", post(command))
        .route("/events", get(events))
        .with_state(handle)
}

/// Serve `router(handle)` on `listener` until `shutdown` resolves.
pub async fn serve(listener: TcpListener, handle: Handle, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    axum::serve(listener, router(handle)).with_graceful_shutdown(shutdown).await
}

fn status_of(r: &Rejection) -> StatusCode {
    match r.code.as_str() {
        "bad_request" | "invalid_speed" => StatusCode::BAD_REQUEST,
        "mission_ended" => StatusCode::CONFLICT,
        "driver_stopped" => StatusCode::SERVICE_UNAVAILABLE,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

fn reject(r: Rejection) -> Response {
    (status_of(&r), Json(r)).into_response()
}

#[derive(Deserialize)]
struct SnapshotQuery {
    tail: Option<usize>,
}

async fn snapshot(State(h): State<Handle>, Query(q): Query<SnapshotQuery>) -> Response {
    let tail = q.tail.unwrap_or(DEFAULT_TAIL);
    h.with_snapshot(|status, snapshot| {
        let end = snapshot.log_len as usize;
        let events = h
            .lines(end.saturating_sub(tail), end)
            .iter()
            .map(|l| RawValue::from_string(l.to_string()).expect("log lines are JSON"))
            .collect();
        Json(SnapshotBody { status, snapshot, events }).into_response()
    })
}

fn parse_command(body: &[u8]) -> Result<CommandRequest, Rejection> {
    serde_json::from_slice(body).map_err(|e| Rejection::bad_request(e.to_string()))
}

async fn command(State(h): State<Handle>, body: Bytes) -> Response {
    let req = match parse_command(&body) {
        Ok(r) => r,
        Err(r) => return reject(r),
    };
    match h.submit(req).await {
        Ok(ack) => Json(ack).into_response(),
        Err(r) => reject(r),
    }
}

#[derive(Deserialize)]
struct EventsQuery {
    #[serde(default)]
    since: usize,
    /// Keep the NDJSON response open for new entries.
    #[serde(default = "yes")]
    follow: bool,
}

fn yes() -> bool {
    true
}

async fn events(
    State(h): State<Handle>,
    Query(q): Query<EventsQuery>,
    ws: Result<WebSocketUpgrade, WebSocketUpgradeRejection>,
) -> Response {
    match ws {
        Ok(ws) => ws.on_upgrade(move |socket| session(socket, h, q.since)),
        Err(_) => ndjson(h, q.since, q.follow),
    }
}

fn ndjson(h: Handle, since: usize, follow: bool) -> Response {
    let rx = h.watch();
    let stream = futures::stream::unfold((h, since, rx, false), move |(h, cursor, mut rx, done)| async move {
        if done {
            return None;
        }
        loop {
            let lines = h.lines_since(cursor);
            if !lines.is_empty() {
                let mut chunk = String::new();
                for l in &lines {
                    chunk.push_str(l);
                    chunk.push('\n');
                }
                let next = cursor + lines.len();
                return Some((Ok::<_, Infallible>(Bytes::from(chunk)), (h, next, rx, false)));
            }
            let head = *rx.borrow_and_update();
            if !follow || (head.finished && cursor >= head.len) {
                return None;
            }
            if rx.changed().await.is_err() {
                return None;
            }
        }
    });
    Response::builder()
        .header(header::CONTENT_TYPE, "application/x-ndjson")
        .body(Body::from_stream(stream))
        .expect("static response parts")
}

async fn session(mut socket: WebSocket, h: Handle, since: usize) {
    let mut rx = h.watch();
    let mut cursor = since;
    loop {
        rx.borrow_and_update();
        for line in h.lines_since(cursor) {
            if socket.send(Message::Text(line.as_ref().into())).await.is_err() {
                return;
            }
            cursor += 1;
        }
        if !h.with_snapshot(|s, _| s.running) && cursor >= h.head().len {
            let _ = socket.send(Message::Close(None)).await;
            return;
        }
        tokio::select! {
            changed = rx.changed() => {
                if changed.is_err() {
                    return;
                }
            }
            msg = socket.recv() => {
                let text = match msg {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                    Some(Ok(_)) => continue,
                };
                let reply = match parse_command(text.as_bytes()) {
                    Ok(req) => match h.submit(req).await {
                        Ok(a) => Reply::Ack(a),
                        Err(r) => Reply::Rejected(r),
                    },
                    Err(r) => Reply::Rejected(r),
                };
                let out = serde_json::to_string(&reply).expect("replies serialize");
                if socket.send(Message::Text(out.into())).await.is_err() {
                    return;
                }
            }
        }
    }
}
