//! Session-based HTTP interface to the reference interpreter.
//!
//! Each step applies one input and then the output phase, so a session is
//! always waiting for input between requests.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rand::Rng;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::dsl::{self, ModelError, ValidatedModel, ValidationError};
use crate::lts::Label;
use crate::semantics::{enabled_inputs, initial_state, step_input, PState};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(3600);

struct Session {
    model: ValidatedModel,
    current: PState,
    trace: Vec<(Label, PState)>,
}

type SessionRef = Arc<tokio::sync::Mutex<Session>>;

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, (SessionRef, Instant)>>>,
    idle: Duration,
}

impl AppState {
    pub fn new(idle: Duration) -> Self {
        AppState {
            sessions: Arc::default(),
            idle,
        }
    }

    /// Looks a session up and drops every session idle for too long.
    fn get(&self, id: &str) -> Result<SessionRef, ApiError> {
        let mut map = self.sessions.lock().expect("session table lock");
        let now = Instant::now();
        map.retain(|_, (_, seen)| now.duration_since(*seen) < self.idle);
        let entry = map.get_mut(id).ok_or(ApiError::NotFound)?;
        entry.1 = now;
        Ok(entry.0.clone())
    }

    fn insert(&self, session: Session) -> String {
        let id = format!("{:032x}", rand::thread_rng().gen::<u128>());
        let mut map = self.sessions.lock().expect("session table lock");
        map.insert(id.clone(), (Arc::new(tokio::sync::Mutex::new(session)), Instant::now()));
        id
    }

    fn remove(&self, id: &str) -> bool {
        self.sessions.lock().expect("session table lock").remove(id).is_some()
    }
}

enum ApiError {
    BadModel(ModelError),
    NotFound,
    NotEnabled(String),
}

fn model_error_kind(e: &ModelError) -> &'static str {
    match e {
        ModelError::Syntax(_) => "SyntaxError",
        ModelError::Validation(v) => match v {
            ValidationError::MissingRule(_) => "MissingRule",
            ValidationError::DuplicateRule(_) => "DuplicateRule",
            ValidationError::UndeclaredVariable(_) => "UndeclaredVariable",
            ValidationError::TypeMismatch(_) => "TypeMismatch",
            ValidationError::UnknownAction(_) => "UnknownAction",
            ValidationError::DuplicateDeclaration(_) => "DuplicateDeclaration",
        },
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind, message) = match &self {
            ApiError::BadModel(e) => (StatusCode::BAD_REQUEST, model_error_kind(e), e.to_string()),
            ApiError::NotFound => (StatusCode::NOT_FOUND, "UnknownSession", "no such session".into()),
            ApiError::NotEnabled(a) => (StatusCode::CONFLICT, "ActionNotEnabled", format!("action `{a}` is not enabled")),
        };
        (status, Json(json!({ "error": kind, "message": message }))).into_response()
    }
}

fn state_json(model: &ValidatedModel, s: &PState) -> Value {
    let mut m = Map::new();
    for (name, b) in &s.bvals {
        m.insert(name.clone(), Value::Bool(*b));
    }
    for (name, p) in &s.pvals {
        m.insert(name.clone(), Value::String(p.to_string()));
    }
    m.insert(dsl::OUTPUT_TYPE.into(), Value::String(s.out_type.to_string()));
    m.insert(dsl::OUTPUT_PLANE.into(), Value::String(s.out_plane.to_string()));
    debug_assert_eq!(m.len(), model.bool_vars().len() + model.plane_vars().len() + 2);
    Value::Object(m)
}

fn output_json(label: &Label) -> Value {
    match label {
        Label::Output(x, p) => json!({ "type": x.to_string(), "plane": p.to_string() }),
        _ => Value::Null,
    }
}

#[derive(Deserialize)]
struct CreateRequest {
    source: String,
}

#[derive(Deserialize)]
struct StepRequest {
    action: String,
}

async fn create(State(app): State<AppState>, Json(req): Json<CreateRequest>) -> Result<impl IntoResponse, ApiError> {
    let model = dsl::load(&req.source).map_err(ApiError::BadModel)?;
    let current = initial_state(&model);
    let id = app.insert(Session {
        model,
        current,
        trace: Vec::new(),
    });
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))))
}

async fn state(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = app.get(&id)?;
    let s = s.lock().await;
    Ok(Json(state_json(&s.model, &s.current)))
}

async fn enabled(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = app.get(&id)?;
    let s = s.lock().await;
    Ok(Json(json!(enabled_inputs(&s.model, &s.current))))
}

async fn step(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<StepRequest>,
) -> Result<Json<Value>, ApiError> {
    let s = app.get(&id)?;
    let mut s = s.lock().await;
    let next = step_input(&s.model, &s.current, &req.action).map_err(|_| ApiError::NotEnabled(req.action.clone()))?;
    let output = next.output();
    s.trace.push((Label::Input(req.action), next.clone()));
    s.trace.push((output.clone(), next.clone()));
    s.current = next;
    Ok(Json(json!({
        "output": output_json(&output),
        "state": state_json(&s.model, &s.current),
    })))
}

async fn reset(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = app.get(&id)?;
    let mut s = s.lock().await;
    s.current = initial_state(&s.model);
    s.trace.clear();
    Ok(Json(state_json(&s.model, &s.current)))
}

async fn trace(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = app.get(&id)?;
    let s = s.lock().await;
    let entries: Vec<Value> = s
        .trace
        .iter()
        .map(|(l, st)| json!({ "label": l.to_string(), "state": state_json(&s.model, st) }))
        .collect();
    Ok(Json(Value::Array(entries)))
}

async fn delete(State(app): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    if app.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::NotFound)
    }
}

pub fn router_with(app: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/:id", axum::routing::delete(delete))
        .route("/sessions/:id/state", get(state))
        .route("/sessions/:id/enabled", get(enabled))
        .route("/sessions/:id/step", post(step))
        .route("/sessions/:id/reset", post(reset))
        .route("/sessions/:id/trace", get(trace))
        .with_state(app)
}

pub fn router() -> Router {
    router_with(AppState::new(DEFAULT_IDLE_TIMEOUT))
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router()).await
}
