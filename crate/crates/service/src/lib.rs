//! HTTP front for live StAT exams.
//!
//! Routes:
//! - `POST /sessions` creates a session and returns the first question.
//! - `GET /sessions/{id}` current state, for clients resuming after a reload.
//! - `POST /sessions/{id}/responses` with `{step, chosen}`; resubmitting the
//!   same answer for a step returns the original reply.
//! - `GET /sessions/{id}/belief` posterior summary.
//! - `GET /sessions/{id}/result` final result once the exam is over.
//! - `GET /healthz`.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;

pub mod api;
pub mod error;
pub mod session;
pub mod store;

use api::{BeliefView, CreateSession, ResponseReply, ResultView, SessionView, SubmitResponse};
use error::ApiError;
use session::{Event, Session, Submit};
use store::Store;

type Shared = Arc<Mutex<Session>>;

pub struct AppState {
    sessions: Mutex<HashMap<String, Shared>>,
    store: Store,
}

impl AppState {
    /// Opens the data directory and replays every session log in it.
    pub fn open(data_dir: impl Into<PathBuf>) -> std::io::Result<Arc<Self>> {
        let store = Store::open(data_dir)?;
        let sessions = store
            .recover()?
            .into_iter()
            .map(|s| (s.id().to_string(), Arc::new(Mutex::new(s))))
            .collect::<HashMap<_, _>>();
        log::info!("recovered {} sessions from {}", sessions.len(), store.dir().display());
        Ok(Arc::new(AppState {
            sessions: Mutex::new(sessions),
            store,
        }))
    }

    fn get(&self, id: &str) -> Result<Shared, ApiError> {
        self.sessions
            .lock()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/responses", post(submit_response))
        .route("/sessions/{id}/belief", get(get_belief))
        .route("/sessions/{id}/result", get(get_result))
        .fallback(|| async { ApiError::NotFound("route".into()) })
        .with_state(state)
}

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::BadRequest(e.body_text()))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let req = body(payload)?;
    let id = uuid::Uuid::new_v4();
    let seed = req.seed.unwrap_or_else(|| {
        let b = id.as_bytes();
        u64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]])
    });
    let id = id.to_string();
    let session = Session::new(id.clone(), seed, req.config)?;
    state.store.create(&session.created_event(), &id)?;
    let view = session.view();
    state
        .sessions
        .lock()
        .expect("session map poisoned")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let s = state.get(&id)?;
    let view = s.lock().expect("session poisoned").view();
    Ok(Json(view))
}

async fn submit_response(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    payload: Result<Json<SubmitResponse>, JsonRejection>,
) -> Result<Json<ResponseReply>, ApiError> {
    let req = body(payload)?;
    let shared = state.get(&id)?;
    let mut session = shared.lock().expect("session poisoned");
    match session.submit(req.step, req.chosen)? {
        Submit::Replayed(reply) => Ok(Json(reply)),
        Submit::Accepted(next, reply) => {
            state.store.append(&id, &Event::Response {
                step: req.step,
                chosen: req.chosen,
            })?;
            *session = *next;
            Ok(Json(reply))
        }
    }
}

async fn get_belief(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<BeliefView>, ApiError> {
    let s = state.get(&id)?;
    let view = s.lock().expect("session poisoned").belief()?;
    Ok(Json(view))
}

async fn get_result(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<ResultView>, ApiError> {
    let s = state.get(&id)?;
    let view = s.lock().expect("session poisoned").result()?;
    Ok(Json(view))
}
