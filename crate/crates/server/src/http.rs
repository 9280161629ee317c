//! HTTP + JSON API and the server-sent-event feed.

use std::collections::HashMap;
use std::convert::Infallible;
use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use artemis_core::data::Acuity;
use artemis_core::VictimReport;
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::Deserialize;
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, watch};

use crate::registry::{ServerEvent, VictimStatus};
use crate::store::Store;
use crate::ServerError;

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    /// `None` keeps everything in memory.
    pub log_path: Option<PathBuf>,
}

#[derive(Clone)]
struct AppState {
    store: Arc<Store>,
    shutdown: Arc<watch::Sender<bool>>,
}

pub fn router(store: Arc<Store>) -> Router {
    app(AppState {
        store,
        shutdown: Arc::new(watch::channel(false).0),
    })
}

fn app(state: AppState) -> Router {
    Router::new()
        .route("/api/reports", post(post_report))
        .route("/api/victims", get(list_victims))
        .route("/api/victims/{id}/status", post(post_status))
        .route("/api/events", get(events))
        .route("/api/health", get(|| async { Json(json!({"status": "ok"})) }))
        .with_state(state)
}

/// Serves until `shutdown` resolves; open event streams are closed so the
/// graceful shutdown can finish.
pub async fn serve(
    listener: TcpListener,
    store: Arc<Store>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let signal = Arc::new(watch::channel(false).0);
    let app = app(AppState {
        store,
        shutdown: signal.clone(),
    });
    axum::serve(listener, app)
        .with_graceful_shutdown(async move {
            shutdown.await;
            signal.send_replace(true);
        })
        .await
}

impl IntoResponse for ServerError {
    fn into_response(self) -> Response {
        let (status, body) = match &self {
            ServerError::Validation(errors) => (StatusCode::BAD_REQUEST, json!({ "errors": errors })),
            ServerError::NotFound(_) => (StatusCode::NOT_FOUND, json!({ "error": self.to_string() })),
            ServerError::Conflict { from, .. } => (
                StatusCode::CONFLICT,
                json!({ "error": self.to_string(), "status": from }),
            ),
            ServerError::Storage { .. } | ServerError::Corrupt { .. } => {
                log::error!("{self}");
                (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": "storage failure" }))
            }
        };
        (status, Json(body)).into_response()
    }
}

fn bad_request(message: impl Into<String>) -> Response {
    ServerError::Validation(vec![message.into()]).into_response()
}

/// Runs a store call off the async workers; commits sync the log to disk.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f).await.expect("store call panicked")
}

async fn post_report(State(state): State<AppState>, body: Bytes) -> Response {
    let report: VictimReport = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return bad_request(format!("body: {e}")),
    };
    let store = state.store.clone();
    match blocking(move || store.submit_report(&report)).await {
        Ok(s) => Json(json!({
            "victim_id": s.victim_id,
            "event_id": s.event_id,
            "duplicate": s.duplicate(),
        }))
        .into_response(),
        Err(e) => e.into_response(),
    }
}

async fn list_victims(State(state): State<AppState>, Query(query): Query<HashMap<String, String>>) -> Response {
    let status = match query.get("status").filter(|s| !s.is_empty()) {
        Some(s) => match s.parse::<VictimStatus>() {
            Ok(s) => Some(s),
            Err(e) => return bad_request(format!("status: {e}")),
        },
        None => None,
    };
    let acuity = match query.get("acuity").filter(|s| !s.is_empty()) {
        Some(a) => match a.parse::<u8>().ok().and_then(Acuity::from_level) {
            Some(a) => Some(a),
            None => return bad_request(format!("acuity: {a:?} is not a level 1-5")),
        },
        None => None,
    };
    Json(state.store.list_victims(status, acuity)).into_response()
}

#[derive(Deserialize)]
struct StatusRequest {
    status: VictimStatus,
    responder: String,
}

async fn post_status(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Response {
    let request: StatusRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return bad_request(format!("body: {e}")),
    };
    if request.responder.trim().is_empty() {
        return bad_request("responder: must not be empty");
    }
    let store = state.store.clone();
    match blocking(move || store.update_status(&id, request.status, &request.responder)).await {
        Ok(entry) => Json(entry).into_response(),
        Err(e) => e.into_response(),
    }
}

/// Replays events after `since` (or the `Last-Event-ID` header), then follows live.
async fn events(
    State(state): State<AppState>,
    Query(query): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> Response {
    let header = headers.get("last-event-id").and_then(|v| v.to_str().ok());
    let since = match header.or(query.get("since").map(String::as_str)) {
        None | Some("") => 0,
        Some(s) => match s.trim().parse::<u64>() {
            Ok(n) => n,
            Err(_) => return bad_request(format!("since: {s:?} is not an event id")),
        },
    };
    let (replay, receiver) = state.store.subscribe(since);
    let mut stop = state.shutdown.subscribe();
    let stopped = async move {
        let _ = stop.wait_for(|s| *s).await;
    };
    let feed = stream::iter(replay).chain(live(receiver)).take_until(stopped).map(to_sse);
    Sse::new(feed).keep_alive(KeepAlive::default()).into_response()
}

fn live(receiver: broadcast::Receiver<ServerEvent>) -> impl Stream<Item = ServerEvent> {
    stream::unfold(receiver, |mut rx| async move {
        match rx.recv().await {
            Ok(event) => Some((event, rx)),
            Err(broadcast::error::RecvError::Lagged(n)) => {
                // Ending the stream makes the client resume from its last id.
                log::warn!("event subscriber fell {n} events behind; closing its stream");
                None
            }
            Err(broadcast::error::RecvError::Closed) => None,
        }
    })
}

fn to_sse(event: ServerEvent) -> Result<Event, Infallible> {
    Ok(Event::default()
        .id(event.id.to_string())
        .event(event.kind.as_str())
        .data(serde_json::to_string(&event).expect("events serialize")))
}

/// Opens the store, binds and serves until Ctrl-C.
pub async fn run(config: ServerConfig) -> crate::Result<()> {
    let store = Arc::new(match &config.log_path {
        Some(path) => Store::open(path)?,
        None => Store::in_memory(),
    });
    let listener = TcpListener::bind(config.listen).await.map_err(|source| ServerError::Storage {
        path: PathBuf::from(config.listen.to_string()),
        source,
    })?;
    log::info!("listening on http://{}", listener.local_addr().unwrap_or(config.listen));
    serve(listener, store, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
    .map_err(|source| ServerError::Storage {
        path: PathBuf::from(config.listen.to_string()),
        source,
    })
}
