//! HTTP + JSON front for a [`Studio`].
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions` | `{checkpoint?, seed?, config?}` |
//! | GET | `/sessions/{id}` | |
//! | POST | `/sessions/{id}/lines` | `{count}` |
//! | GET | `/sessions/{id}/lines` | |
//! | POST | `/sessions/{id}/selection` | `{add: [], remove: []}` |
//! | POST | `/validate-edit` | `{original, edited}` |
//! | POST | `/sessions/{id}/poems` | `{title, entries?}` |
//! | GET | `/poems/{id}` | |
//! | PUT | `/poems/{id}/entries` | `{entries, title?}` |
//! | POST | `/poems/{id}/finalize` | |
//! | GET | `/poems/{id}/export?format=text\|json` | |
//!
//! Failures are `{"code": ..., "message": ...}` with a matching status.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use lynwerk_core::generator::CandidateLine;
use lynwerk_core::studio::{validate_edit, CreateSession, EntryInput, Poem, Session, Studio, StudioError};
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Debug)]
pub enum ApiError {
    Studio(StudioError),
    BadRequest(String),
    Internal(String),
}

impl From<StudioError> for ApiError {
    fn from(e: StudioError) -> Self {
        Self::Studio(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::BadRequest(e.body_text())
    }
}

fn status_of(e: &StudioError) -> StatusCode {
    use StudioError::*;
    match e {
        SessionNotFound(_) | PoemNotFound(_) => StatusCode::NOT_FOUND,
        InvalidCount(_) | InvalidConfig(_) | NoCheckpoint | BadCheckpoint(_) => StatusCode::BAD_REQUEST,
        LineInUse(_) | PoemFinalized(_) | EmptyPoem(_) => StatusCode::CONFLICT,
        UnknownLine(_) | NotSelected(_) | EditRuleViolation { .. } | Generation(_) => StatusCode::UNPROCESSABLE_ENTITY,
        Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message) = match self {
            Self::Studio(e) => (status_of(&e), e.code(), e.to_string()),
            Self::BadRequest(m) => (StatusCode::BAD_REQUEST, "BadRequest", m),
            Self::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "Internal", m),
        };
        (status, Json(json!({ "code": code, "message": message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = State<Arc<Studio>>;

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, StudioError> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(ApiError::from)
}

async fn create_session(
    State(studio): Shared,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Session>)> {
    let Json(req) = body?;
    let session = blocking(move || studio.create_session(req)).await?;
    Ok((StatusCode::CREATED, Json(session)))
}

async fn get_session(State(studio): Shared, Path(id): Path<String>) -> ApiResult<Json<Session>> {
    Ok(Json(studio.session(&id)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinesRequest {
    count: usize,
}

#[derive(Serialize)]
struct OfferedLine {
    #[serde(flatten)]
    line: CandidateLine,
    selected: bool,
}

async fn request_lines(
    State(studio): Shared,
    Path(id): Path<String>,
    body: Result<Json<LinesRequest>, JsonRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let Json(req) = body?;
    let sid = id.clone();
    let lines = blocking(move || studio.request_lines(&sid, req.count)).await?;
    Ok(Json(json!({ "session_id": id, "lines": lines })))
}

async fn list_lines(State(studio): Shared, Path(id): Path<String>) -> ApiResult<Json<serde_json::Value>> {
    let session = studio.session(&id)?;
    let lines: Vec<OfferedLine> = session
        .offered
        .values()
        .map(|l| OfferedLine {
            selected: session.selected.contains(&l.id),
            line: l.clone(),
        })
        .collect();
    Ok(Json(json!({ "session_id": id, "lines": lines, "selected": session.selected })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectionRequest {
    #[serde(default)]
    add: Vec<String>,
    #[serde(default)]
    remove: Vec<String>,
}

async fn change_selection(
    State(studio): Shared,
    Path(id): Path<String>,
    body: Result<Json<SelectionRequest>, JsonRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let Json(req) = body?;
    let session = blocking(move || studio.change_selection(&id, &req.add, &req.remove)).await?;
    Ok(Json(json!({ "session_id": session.id, "selected": session.selected })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EditRequest {
    original: String,
    edited: String,
}

async fn check_edit(body: Result<Json<EditRequest>, JsonRejection>) -> ApiResult<Json<serde_json::Value>> {
    let Json(req) = body?;
    Ok(Json(serde_json::to_value(validate_edit(&req.original, &req.edited)).expect("verdict serializes")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PoemRequest {
    #[serde(default)]
    title: String,
    entries: Option<Vec<EntryInput>>,
}

async fn create_poem(
    State(studio): Shared,
    Path(id): Path<String>,
    body: Result<Json<PoemRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Poem>)> {
    let Json(req) = body?;
    let poem = blocking(move || studio.create_poem(&id, &req.title, req.entries.as_deref())).await?;
    Ok((StatusCode::CREATED, Json(poem)))
}

async fn get_poem(State(studio): Shared, Path(id): Path<String>) -> ApiResult<Json<Poem>> {
    Ok(Json(studio.poem(&id)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntriesRequest {
    entries: Vec<EntryInput>,
    title: Option<String>,
}

async fn set_entries(
    State(studio): Shared,
    Path(id): Path<String>,
    body: Result<Json<EntriesRequest>, JsonRejection>,
) -> ApiResult<Json<Poem>> {
    let Json(req) = body?;
    let poem = blocking(move || studio.set_entries(&id, &req.entries, req.title.as_deref())).await?;
    Ok(Json(poem))
}

async fn finalize(State(studio): Shared, Path(id): Path<String>) -> ApiResult<Json<Poem>> {
    Ok(Json(blocking(move || studio.finalize(&id)).await?))
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn export(State(studio): Shared, Path(id): Path<String>, Query(q): Query<ExportQuery>) -> ApiResult<Response> {
    let poem = studio.poem(&id)?;
    match q.format.as_deref().unwrap_or("text") {
        "text" => Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], poem.to_text()).into_response()),
        "json" => {
            let text = poem.to_text();
            Ok(Json(json!({ "poem": poem, "text": text })).into_response())
        }
        other => Err(ApiError::BadRequest(format!("unknown export format {other:?}; use text or json"))),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

pub fn router(studio: Arc<Studio>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/lines", post(request_lines).get(list_lines))
        .route("/sessions/{id}/selection", post(change_selection))
        .route("/sessions/{id}/poems", post(create_poem))
        .route("/validate-edit", post(check_edit))
        .route("/poems/{id}", get(get_poem))
        .route("/poems/{id}/entries", put(set_entries))
        .route("/poems/{id}/finalize", post(finalize))
        .route("/poems/{id}/export", get(export))
        .with_state(studio)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, studio: Arc<Studio>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("studio listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(studio)).await
}
