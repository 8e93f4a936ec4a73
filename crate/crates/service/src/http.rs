use std::future::Future;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cyrus_api::{AnswerRequest, ApiError, CreateSession, SqlRequest, TranslateRequest};
use serde::Serialize;
use tower_http::trace::TraceLayer;

use crate::tutor::{ServiceError, Tutor};

type Shared = State<Arc<Tutor>>;

pub struct Failure(StatusCode, ApiError);

impl From<ServiceError> for Failure {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::UnknownDatabase(_)
            | ServiceError::UnknownSession(_)
            | ServiceError::UnknownAssignment(_) => StatusCode::NOT_FOUND,
            ServiceError::ModeViolation(_) => StatusCode::FORBIDDEN,
            ServiceError::DuplicateSubmission(_) => StatusCode::CONFLICT,
            ServiceError::TranslationFailed(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Io(_) | ServiceError::Catalog(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        Failure(status, e.to_api())
    }
}

impl From<JsonRejection> for Failure {
    fn from(e: JsonRejection) -> Self {
        Failure(
            StatusCode::BAD_REQUEST,
            ApiError::new("BadRequest", e.body_text()),
        )
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type Reply<T> = Result<Json<T>, Failure>;

/// Runs tutor work off the async executor; translation and evaluation are
/// CPU-bound.
async fn blocking<T, F>(tutor: Arc<Tutor>, f: F) -> Reply<T>
where
    T: Serialize + Send + 'static,
    F: FnOnce(&Tutor) -> Result<T, ServiceError> + Send + 'static,
{
    match tokio::task::spawn_blocking(move || f(&tutor)).await {
        Ok(r) => r.map(Json).map_err(Failure::from),
        Err(e) => Err(Failure(
            StatusCode::INTERNAL_SERVER_ERROR,
            ApiError::new("Internal", e.to_string()),
        )),
    }
}

async fn create_session(
    State(t): Shared,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return Failure::from(e).into_response(),
    };
    match blocking(t, move |t| t.start_session(req)).await {
        Ok(info) => (StatusCode::CREATED, info).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn session(State(t): Shared, Path(id): Path<String>) -> Reply<cyrus_api::SessionInfo> {
    blocking(t, move |t| t.session_info(&id)).await
}

async fn translate(
    State(t): Shared,
    Path(id): Path<String>,
    body: Result<Json<TranslateRequest>, JsonRejection>,
) -> Reply<cyrus_api::TranslateResponse> {
    let Json(req) = body?;
    blocking(t, move |t| t.translate_and_run(&id, &req.text)).await
}

async fn sql(
    State(t): Shared,
    Path(id): Path<String>,
    body: Result<Json<SqlRequest>, JsonRejection>,
) -> Reply<cyrus_api::ResultTable> {
    let Json(req) = body?;
    blocking(t, move |t| t.run_sql(&id, &req.sql)).await
}

async fn answer(
    State(t): Shared,
    Path(id): Path<String>,
    body: Result<Json<AnswerRequest>, JsonRejection>,
) -> Reply<cyrus_api::AnswerResponse> {
    let Json(req) = body?;
    blocking(t, move |t| t.submit_answer(&id, &req.assignment, &req.sql)).await
}

async fn score(State(t): Shared, Path(id): Path<String>) -> Reply<cyrus_api::Score> {
    blocking(t, move |t| t.score(&id)).await
}

async fn assignments(
    State(t): Shared,
    Path(id): Path<String>,
) -> Reply<Vec<cyrus_api::AssignmentView>> {
    blocking(t, move |t| t.assignments(&id)).await
}

async fn databases(State(t): Shared) -> Json<Vec<cyrus_api::DatabaseInfo>> {
    Json(t.databases())
}

async fn schema(State(t): Shared, Path(id): Path<String>) -> Reply<cyrus_api::SchemaDoc> {
    t.schema(&id).map(Json).map_err(Failure::from)
}

async fn not_found() -> Failure {
    Failure(
        StatusCode::NOT_FOUND,
        ApiError::new("NotFound", "no such endpoint"),
    )
}

pub fn router(tutor: Arc<Tutor>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session))
        .route("/sessions/{id}/translate", post(translate))
        .route("/sessions/{id}/sql", post(sql))
        .route("/sessions/{id}/answers", post(answer))
        .route("/sessions/{id}/score", get(score))
        .route("/sessions/{id}/assignments", get(assignments))
        .route("/databases", get(databases))
        .route("/databases/{id}/schema", get(schema))
        .fallback(not_found)
        .layer(TraceLayer::new_for_http())
        .with_state(tutor)
}

/// Serves until `shutdown` resolves, then flushes the session log.
pub async fn serve(
    listener: tokio::net::TcpListener,
    tutor: Arc<Tutor>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let app = router(tutor.clone());
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await?;
    tutor.flush();
    Ok(())
}
