//! HTTP+JSON wire API.
//!
//! | method | path                         | body / query            | response                         |
//! |--------|------------------------------|-------------------------|----------------------------------|
//! | POST   | `/sessions`                  | `{seed?}`               | `{id, seed}`                     |
//! | POST   | `/sessions/{id}/inquiry`     | `{question, name?}`     | session view                     |
//! | POST   | `/sessions/{id}/toss`        |                         | `{toss_index, coins, layer_summary, state}` |
//! | POST   | `/sessions/{id}/interpret`   |                         | session view                     |
//! | POST   | `/sessions/{id}/complete`    |                         | session view                     |
//! | POST   | `/sessions/{id}/reset`       |                         | session view                     |
//! | GET    | `/sessions/{id}`             |                         | session view (redacted before Interpreting) |
//! | GET    | `/sessions/{id}/plan`        |                         | canonical plan JSON              |
//! | GET    | `/sessions/{id}/playback`    | `?from=&window=`        | playback chunk                   |
//! | GET    | `/health`                    |                         | `{status}`                       |
//!
//! Errors are `{code, message}` with a 4xx or 5xx status.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use yao_core::interpret::Inquiry;
use yao_core::Coin;

use crate::error::SessionError;
use crate::service::SessionService;
use crate::session::{LayerSummary, SessionState};

impl SessionError {
    pub fn status(&self) -> StatusCode {
        match self {
            SessionError::InvalidState { .. } | SessionError::Busy | SessionError::PlanNotReady => StatusCode::CONFLICT,
            SessionError::EmptyQuestion | SessionError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            SessionError::IncompleteCasting => StatusCode::CONFLICT,
            SessionError::UnknownSession(_) => StatusCode::NOT_FOUND,
            SessionError::ProviderUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            SessionError::MalformedProviderOutput { .. } => StatusCode::BAD_GATEWAY,
            SessionError::LogCorrupt(_) | SessionError::Io(_) | SessionError::Internal(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

impl IntoResponse for SessionError {
    fn into_response(self) -> Response {
        let body = json!({"code": self.code(), "message": self.to_string()});
        (self.status(), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, SessionError>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TossResponse {
    pub toss_index: u8,
    pub coins: [Coin; 3],
    pub layer_summary: LayerSummary,
    pub state: SessionState,
}

#[derive(Debug, Deserialize)]
struct PlaybackQuery {
    from: Option<f64>,
    window: Option<f64>,
}

const DEFAULT_WINDOW_SECONDS: f64 = 10.0;

fn parse_json<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| {
        // a whitespace-only question is a domain error, not a syntax error
        if e.to_string().contains("question must not be empty") {
            SessionError::EmptyQuestion
        } else {
            SessionError::InvalidRequest(e.to_string())
        }
    })
}

/// Runs a blocking service call off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| SessionError::Internal(e.to_string()))?
}

async fn create(State(svc): State<Arc<SessionService>>, body: Bytes) -> ApiResult<(StatusCode, Json<Created>)> {
    let req: CreateBody = if body.iter().all(u8::is_ascii_whitespace) {
        CreateBody::default()
    } else {
        parse_json(&body)?
    };
    let s = svc.create_session(req.seed)?;
    Ok((StatusCode::CREATED, Json(Created { id: s.id, seed: s.seed })))
}

async fn inquiry(
    State(svc): State<Arc<SessionService>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let inquiry: Inquiry = parse_json(&body)?;
    Ok(Json(svc.submit_inquiry(&id, inquiry)?.view()))
}

async fn toss(State(svc): State<Arc<SessionService>>, Path(id): Path<String>) -> ApiResult<Json<TossResponse>> {
    let (out, session) = svc.perform_toss(&id)?;
    Ok(Json(TossResponse {
        toss_index: out.toss_index,
        coins: out.toss.coins(),
        layer_summary: LayerSummary::from(&out.layer),
        state: session.state,
    }))
}

async fn interpret(State(svc): State<Arc<SessionService>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = blocking(move || svc.run_interpretation(&id)).await?;
    Ok(Json(s.view()))
}

async fn complete(State(svc): State<Arc<SessionService>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(svc.complete(&id)?.view()))
}

async fn reset(State(svc): State<Arc<SessionService>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(svc.reset(&id)?.view()))
}

async fn show(State(svc): State<Arc<SessionService>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(svc.get(&id)?.view()))
}

async fn plan(State(svc): State<Arc<SessionService>>, Path(id): Path<String>) -> ApiResult<Response> {
    let plan = svc.get_plan(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], plan.to_canonical_json()).into_response())
}

async fn playback(
    State(svc): State<Arc<SessionService>>,
    Path(id): Path<String>,
    Query(q): Query<PlaybackQuery>,
) -> ApiResult<Response> {
    let from = q.from.unwrap_or(0.0);
    let window = q.window.unwrap_or(DEFAULT_WINDOW_SECONDS);
    let chunk = blocking(move || svc.get_playback(&id, from, window)).await?;
    Ok(Json(chunk).into_response())
}

async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

pub fn router(service: Arc<SessionService>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/inquiry", post(inquiry))
        .route("/sessions/{id}/toss", post(toss))
        .route("/sessions/{id}/interpret", post(interpret))
        .route("/sessions/{id}/complete", post(complete))
        .route("/sessions/{id}/reset", post(reset))
        .route("/sessions/{id}/plan", get(plan))
        .route("/sessions/{id}/playback", get(playback))
        .with_state(service)
}

/// Serves the API until ctrl-c, evicting idle sessions in the background.
pub async fn serve(listener: tokio::net::TcpListener, service: Arc<SessionService>) -> std::io::Result<()> {
    let sweeper = {
        let svc = service.clone();
        let every = (svc.config().ttl / 4).clamp(std::time::Duration::from_secs(1), std::time::Duration::from_secs(60));
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(every);
            loop {
                tick.tick().await;
                let dropped = svc.evict_idle();
                if dropped > 0 {
                    tracing::info!(dropped, "evicted idle sessions");
                }
            }
        })
    };
    let result = axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    sweeper.abort();
    result
}
