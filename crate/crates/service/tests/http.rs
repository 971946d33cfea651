use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;
use yao_core::interpret::{InterpretError, InterpretationProvider, MockProvider, PromptDocument};
use yao_core::render::PlaybackChunk;
use yao_core::Corpus;
use yao_service::api::router;
use yao_service::{ManualClock, ServiceConfig, SessionService};

fn app_with(provider: Arc<dyn InterpretationProvider>) -> (Router, Arc<SessionService>) {
    let svc = Arc::new(SessionService::new(
        ServiceConfig::default(),
        Corpus::bundled(),
        provider,
        None,
        Arc::new(ManualClock::new(1_000)),
    ));
    (router(svc.clone()), svc)
}

fn app() -> Router {
    app_with(Arc::new(MockProvider)).0
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

async fn send_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = send(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn new_session(app: &Router, seed: u64) -> String {
    let (status, v) = send_json(app, "POST", "/sessions", Some(json!({"seed": seed}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["seed"], seed);
    v["id"].as_str().unwrap().to_owned()
}

async fn cast(app: &Router, id: &str) {
    let (status, _) = send_json(
        app,
        "POST",
        &format!("/sessions/{id}/inquiry"),
        Some(json!({"question": "Which way?"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    for _ in 0..6 {
        let (status, _) = send_json(app, "POST", &format!("/sessions/{id}/toss"), None).await;
        assert_eq!(status, StatusCode::OK);
    }
}

#[tokio::test]
async fn full_ritual() {
    let app = app();
    let id = new_session(&app, 11).await;
    let (status, v) = send_json(
        &app,
        "POST",
        &format!("/sessions/{id}/inquiry"),
        Some(json!({"question": "Which way?", "name": "Ada"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["state"]["phase"], "casting");

    for k in 1..=6 {
        let (status, v) = send_json(&app, "POST", &format!("/sessions/{id}/toss"), None).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(v["toss_index"], k);
        assert_eq!(v["coins"].as_array().unwrap().len(), 3);
        assert_eq!(v["layer_summary"]["line_index"], k);
        // a toss reveals coins and a layer, never a line type
        assert!(v.get("line").is_none());
    }
    let (_, v) = send_json(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(v["state"]["phase"], "interpreting");
    assert!(v["record"]["ben_gua"].is_object());

    let (status, v) = send_json(&app, "POST", &format!("/sessions/{id}/interpret"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["state"]["phase"], "playback");
    assert!(v["reading"]["body"].as_str().unwrap().starts_with("Ada, you asked"));

    let (status, v) = send_json(&app, "POST", &format!("/sessions/{id}/complete"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["state"]["phase"], "complete");

    let (status, v) = send_json(&app, "POST", &format!("/sessions/{id}/reset"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["state"]["phase"], "intake");
    assert_eq!(v["layers"], json!([]));
    assert_eq!(v["epoch"], 1);
}

#[tokio::test]
async fn casting_view_hides_semantics() {
    let app = app();
    let id = new_session(&app, 3).await;
    send_json(
        &app,
        "POST",
        &format!("/sessions/{id}/inquiry"),
        Some(json!({"question": "q"})),
    )
    .await;
    send_json(&app, "POST", &format!("/sessions/{id}/toss"), None).await;
    let (_, bytes) = send(&app, "GET", &format!("/sessions/{id}"), None).await;
    let text = String::from_utf8(bytes).unwrap();
    for hidden in [
        "record", "lines", "polarity", "changing", "ben_gua", "reading", "old_", "young_",
    ] {
        assert!(!text.contains(hidden), "view leaks `{hidden}`: {text}");
    }
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["tosses"].as_array().unwrap().len(), 1);
    assert_eq!(v["layers"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn plan_is_served_as_canonical_bytes() {
    let (app, svc) = app_with(Arc::new(MockProvider));
    let id = new_session(&app, 5).await;
    let (status, v) = send_json(&app, "GET", &format!("/sessions/{id}/plan"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["code"], "plan_not_ready");

    cast(&app, &id).await;
    send_json(&app, "POST", &format!("/sessions/{id}/interpret"), None).await;
    let (status, bytes) = send(&app, "GET", &format!("/sessions/{id}/plan"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(bytes, svc.get_plan(&id).unwrap().to_canonical_json());
}

fn assert_chunk_schema(bytes: &[u8]) {
    let schema: Value = serde_json::from_str(include_str!("../../../docs/playback-chunk.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let chunk: Value = serde_json::from_slice(bytes).unwrap();
    let errors: Vec<String> = validator.iter_errors(&chunk).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "chunk fails schema: {errors:?}");
}

#[tokio::test]
async fn playback_chunks_follow_the_session() {
    let app = app();
    let id = new_session(&app, 8).await;
    let (status, v) = send_json(&app, "GET", &format!("/sessions/{id}/playback"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["code"], "invalid_state");

    cast(&app, &id).await;
    let (status, bytes) = send(&app, "GET", &format!("/sessions/{id}/playback?from=0&window=4"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_chunk_schema(&bytes);
    let chunk: PlaybackChunk = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(chunk.window_seconds, 4.0);
    assert!(!chunk.events.is_empty());
    assert!(chunk.events.iter().all(|e| e.onset.to_seconds(chunk.tempo) < 4.0));
    let casting_digest = chunk.stream_digest.clone();

    send_json(&app, "POST", &format!("/sessions/{id}/interpret"), None).await;
    let (_, bytes) = send(&app, "GET", &format!("/sessions/{id}/playback?from=10"), None).await;
    assert_chunk_schema(&bytes);
    let chunk: PlaybackChunk = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(chunk.window_seconds, 10.0);
    assert_ne!(chunk.stream_digest, casting_digest);
    assert!((30.0..=60.0).contains(&chunk.total_duration));

    let (status, v) = send_json(&app, "GET", &format!("/sessions/{id}/playback?window=-1"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "invalid_request");
}

#[tokio::test]
async fn error_codes() {
    let app = app();
    let (status, v) = send_json(&app, "GET", "/sessions/nope", None).await;
    assert_eq!(
        (status, v["code"].as_str()),
        (StatusCode::NOT_FOUND, Some("unknown_session"))
    );

    let id = new_session(&app, 1).await;
    let (status, v) = send_json(&app, "POST", &format!("/sessions/{id}/toss"), None).await;
    assert_eq!(
        (status, v["code"].as_str()),
        (StatusCode::CONFLICT, Some("invalid_state"))
    );

    let (status, v) = send_json(
        &app,
        "POST",
        &format!("/sessions/{id}/inquiry"),
        Some(json!({"question": "  "})),
    )
    .await;
    assert_eq!(
        (status, v["code"].as_str()),
        (StatusCode::BAD_REQUEST, Some("empty_question"))
    );

    let (status, v) = send_json(
        &app,
        "POST",
        &format!("/sessions/{id}/inquiry"),
        Some(json!({"q": "x"})),
    )
    .await;
    assert_eq!(
        (status, v["code"].as_str()),
        (StatusCode::BAD_REQUEST, Some("invalid_request"))
    );

    let (status, _) = send_json(&app, "POST", "/sessions", Some(json!({"seed": "x"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, v) = send_json(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["state"]["phase"], "intake");

    let (status, v) = send_json(&app, "GET", "/health", None).await;
    assert_eq!((status, v["status"].as_str()), (StatusCode::OK, Some("ok")));
}

#[tokio::test]
async fn empty_create_body_draws_a_seed() {
    let app = app();
    let (status, v) = send_json(&app, "POST", "/sessions", None).await;
    assert_eq!(status, StatusCode::CREATED);
    assert!(v["seed"].is_u64());
}

struct Failing(&'static str);

impl InterpretationProvider for Failing {
    fn id(&self) -> &str {
        "failing"
    }

    fn complete(&self, _doc: &PromptDocument) -> Result<String, InterpretError> {
        match self.0 {
            "down" => Err(InterpretError::ProviderUnavailable("connection refused".into())),
            other => Ok(other.to_owned()),
        }
    }
}

#[tokio::test]
async fn provider_failures_leave_the_session_interpreting() {
    for (provider, status, code) in [
        ("down", StatusCode::SERVICE_UNAVAILABLE, "provider_unavailable"),
        ("{\"body\": 1}", StatusCode::BAD_GATEWAY, "malformed_provider_output"),
    ] {
        let (app, _) = app_with(Arc::new(Failing(provider)));
        let id = new_session(&app, 2).await;
        cast(&app, &id).await;
        let (got, v) = send_json(&app, "POST", &format!("/sessions/{id}/interpret"), None).await;
        assert_eq!((got, v["code"].as_str()), (status, Some(code)));
        let (_, v) = send_json(&app, "GET", &format!("/sessions/{id}"), None).await;
        assert_eq!(v["state"]["phase"], "interpreting");
        assert!(v["reading"].is_null());
    }
}

/// Blocks in `complete` until released.
struct Gated {
    entered: AtomicBool,
    release: AtomicBool,
}

impl InterpretationProvider for Gated {
    fn id(&self) -> &str {
        "mock"
    }

    fn complete(&self, doc: &PromptDocument) -> Result<String, InterpretError> {
        self.entered.store(true, Ordering::SeqCst);
        while !self.release.load(Ordering::SeqCst) {
            std::thread::sleep(Duration::from_millis(5));
        }
        MockProvider.complete(doc)
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn concurrent_writer_is_busy_while_reads_proceed() {
    let gated = Arc::new(Gated {
        entered: AtomicBool::new(false),
        release: AtomicBool::new(false),
    });
    let (app, _) = app_with(gated.clone());
    let id = new_session(&app, 9).await;
    cast(&app, &id).await;

    let slow = {
        let (app, id) = (app.clone(), id.clone());
        tokio::spawn(async move { send_json(&app, "POST", &format!("/sessions/{id}/interpret"), None).await })
    };
    while !gated.entered.load(Ordering::SeqCst) {
        tokio::time::sleep(Duration::from_millis(2)).await;
    }

    let (status, v) = send_json(&app, "POST", &format!("/sessions/{id}/interpret"), None).await;
    assert_eq!((status, v["code"].as_str()), (StatusCode::CONFLICT, Some("busy")));
    let (status, v) = send_json(&app, "POST", &format!("/sessions/{id}/reset"), None).await;
    assert_eq!((status, v["code"].as_str()), (StatusCode::CONFLICT, Some("busy")));
    let (status, v) = send_json(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["state"]["phase"], "interpreting");

    gated.release.store(true, Ordering::SeqCst);
    let (status, v) = slow.await.unwrap();
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["state"]["phase"], "playback");
}
