//! HTTP session API over [`SessionStore`].
//!
//! * `POST /sessions` creates a session and returns its id and stage plan.
//! * `GET /sessions/{id}/next` returns the next required activity.
//! * `POST /sessions/{id}/events` appends a batch of events atomically.
//! * `GET /sessions/{id}/report` returns the scores so far.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use csqvr::session::{Activity, Decision, NewSession, Segment, SessionError, SessionEvent, SessionStore};
use serde::{Deserialize, Serialize};

pub struct ApiError(pub SessionError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0 {
            SessionError::UnknownSession(_) => StatusCode::NOT_FOUND,
            SessionError::OutOfOrderSeq { .. } | SessionError::EventAfterFinish => StatusCode::CONFLICT,
            SessionError::InvalidEvent(_) | SessionError::InvalidRequest(_) => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::Log(_) | SessionError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = serde_json::json!({ "error": self.0.code(), "message": self.0.to_string() });
        (status, Json(body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError(e)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub participant: String,
    pub seed: u64,
    pub ride_duration_ms: i64,
    pub plan: Vec<Segment>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Appended {
    pub decisions: Vec<Decision>,
    pub next: Activity,
}

type Store = State<Arc<SessionStore>>;

async fn create(State(store): Store, Json(req): Json<NewSession>) -> Result<(StatusCode, Json<Created>), ApiError> {
    let (meta, plan) = store.create(req)?;
    Ok((
        StatusCode::CREATED,
        Json(Created {
            id: meta.id,
            participant: meta.participant.0,
            seed: meta.seed,
            ride_duration_ms: meta.ride_duration_ms,
            plan,
        }),
    ))
}

async fn next(State(store): Store, Path(id): Path<String>) -> Result<Json<Activity>, ApiError> {
    Ok(Json(store.next(&id)?))
}

async fn events(
    State(store): Store,
    Path(id): Path<String>,
    Json(batch): Json<Vec<SessionEvent>>,
) -> Result<Json<Appended>, ApiError> {
    let (decisions, next) = store.append(&id, batch)?;
    Ok(Json(Appended { decisions, next }))
}

async fn report(State(store): Store, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(store.report(&id)?).into_response())
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/next", get(next))
        .route("/sessions/{id}/events", post(events))
        .route("/sessions/{id}/report", get(report))
        .with_state(store)
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, store: Arc<SessionStore>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
