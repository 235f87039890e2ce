use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use oat_core::engine::ManualClock;
use oat_core::orchestrator::{Orchestrator, OrchestratorConfig};
use oat_core::parser::RuleBackend;
use oat_core::search::load_corpus;
use oat_core::Execution;
use oat_server::router;

fn app() -> Router {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus");
    let (corpus, _) = load_corpus(&dir, Execution::default()).unwrap();
    let clock = Arc::new(ManualClock::new(0));
    let orch = Orchestrator::new(corpus, Arc::new(RuleBackend::default()), clock, OrchestratorConfig::default()).unwrap();
    router(Arc::new(orch), None)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| panic!("{uri}: not JSON: {bytes:?}"));
    (status, value)
}

async fn new_session(app: &Router) -> String {
    let (status, body) = call(app, Method::POST, "/api/session", None).await;
    assert_eq!(status, StatusCode::CREATED);
    body["session_id"].as_str().unwrap().to_string()
}

async fn say(app: &Router, id: &str, text: &str) -> (StatusCode, Value) {
    call(app, Method::POST, &format!("/api/session/{id}/utterance"), Some(json!({ "text": text }))).await
}

fn keys(v: &Value) -> Vec<&str> {
    let mut k: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    k.sort();
    k
}

fn assert_error(status: StatusCode, body: &Value, want_status: StatusCode, code: &str) {
    assert_eq!(status, want_status, "{body}");
    assert_eq!(keys(body), ["error"]);
    assert_eq!(keys(&body["error"]), ["code", "message"]);
    assert_eq!(body["error"]["code"], code);
}

#[tokio::test]
async fn health() {
    let (status, body) = call(&app(), Method::GET, "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({ "status": "ok", "corpus_size": 50 }));
}

#[tokio::test]
async fn session_turn_and_state_shapes() {
    let app = app();
    let id = new_session(&app).await;
    assert_eq!(id.len(), 32);
    let (status, turn) = say(&app, &id, "I want to make pizza").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(keys(&turn), ["call", "events", "phase", "screen", "speech"]);
    assert_eq!(turn["phase"], "planning");
    assert_eq!(
        keys(&turn["screen"]),
        ["buttons", "headline", "image", "options", "requirements", "step_position", "step_text", "timers", "video"]
    );
    assert_eq!(keys(&turn["screen"]["options"][0]), ["option", "snippet", "task_id", "title"]);

    let (_, turn) = say(&app, &id, "the first one").await;
    assert_eq!(turn["phase"], "execution");
    assert_eq!(turn["screen"]["step_position"][0], 1);

    let (status, view) = call(&app, Method::GET, &format!("/api/session/{id}/state"), None).await;
    assert_eq!(status, StatusCode::OK);
    for k in ["id", "phase", "task_id", "exec", "candidates", "transcript", "created_at", "last_active", "task_title", "timers"] {
        assert!(view.get(k).is_some(), "state lacks {k}: {view}");
    }
    assert_eq!(view["id"], id.as_str());
    assert_eq!(view["transcript"].as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn tasks_search_browse_and_get() {
    let app = app();
    let (status, list) = call(&app, Method::GET, "/api/tasks?q=pizza&k=3", None).await;
    assert_eq!(status, StatusCode::OK);
    let list = list.as_array().unwrap();
    assert!(!list.is_empty() && list.len() <= 3);
    assert_eq!(keys(&list[0]), ["score", "snippet", "task_id", "title"]);
    assert_eq!(list[0]["task_id"], "new-york-style-pizza");

    let (_, browse) = call(&app, Method::GET, "/api/tasks?theme=halloween", None).await;
    let browse = browse.as_array().unwrap();
    assert!(!browse.is_empty());
    assert!(browse.iter().all(|r| r["score"] == 0.0));

    let (status, graph) = call(&app, Method::GET, "/api/tasks/new-york-style-pizza", None).await;
    assert_eq!(status, StatusCode::OK);
    for k in ["id", "title", "nodes", "edges"] {
        assert!(graph.get(k).is_some(), "graph lacks {k}");
    }
    assert!(oat_core::taskgraph::load(graph.to_string().as_bytes()).is_ok());
}

#[tokio::test]
async fn error_envelopes() {
    let app = app();
    let (s, b) = say(&app, "no-such-session", "next").await;
    assert_error(s, &b, StatusCode::NOT_FOUND, "unknown_session");
    let (s, b) = call(&app, Method::GET, "/api/session/no-such-session/state", None).await;
    assert_error(s, &b, StatusCode::NOT_FOUND, "unknown_session");
    let (s, b) = call(&app, Method::GET, "/api/tasks/no-such-task", None).await;
    assert_error(s, &b, StatusCode::NOT_FOUND, "unknown_task");
    let (s, b) = call(&app, Method::GET, "/api/tasks?q=the", None).await;
    assert_error(s, &b, StatusCode::BAD_REQUEST, "bad_query");
    let (s, b) = call(&app, Method::GET, "/api/tasks?q=pizza&k=0", None).await;
    assert_error(s, &b, StatusCode::BAD_REQUEST, "bad_query");
    let (s, b) = call(&app, Method::GET, "/api/tasks?k=lots", None).await;
    assert_error(s, &b, StatusCode::BAD_REQUEST, "bad_request");
    let id = new_session(&app).await;
    let (s, b) = call(&app, Method::POST, &format!("/api/session/{id}/utterance"), Some(json!({ "words": 1 }))).await;
    assert_eq!(b["error"]["code"], "bad_request", "{s}");
    let (s, b) = call(&app, Method::GET, "/api/nothing", None).await;
    assert_error(s, &b, StatusCode::NOT_FOUND, "not_found");
}

const UTTERANCES: &[&str] = &[
    "pizza", "halloween ideas", "first one", "option 2", "next", "back", "yes", "no", "step 3", "step 40",
    "set a timer for 2 minutes", "what do I need", "stop", "thanks", "?", "", "banana bread", "the last one",
];

#[tokio::test]
async fn turn_fuzz_over_http() {
    use rand::rngs::StdRng;
    use rand::seq::IndexedRandom;
    use rand::{Rng, SeedableRng};

    let app = app();
    let mut rng = StdRng::seed_from_u64(5);
    let mut ids = Vec::new();
    for _ in 0..3 {
        ids.push(new_session(&app).await);
    }
    let mut phase: std::collections::HashMap<String, String> =
        ids.iter().map(|i| (i.clone(), "planning".to_string())).collect();
    for _ in 0..1000 {
        let unknown = rng.random_bool(0.05);
        let id = if unknown { "ghost".to_string() } else { ids.choose(&mut rng).unwrap().clone() };
        let text = *UTTERANCES.choose(&mut rng).unwrap();
        let (status, body) = say(&app, &id, text).await;
        if unknown {
            assert_error(status, &body, StatusCode::NOT_FOUND, "unknown_session");
            continue;
        }
        assert_eq!(status, StatusCode::OK, "{text:?}: {body}");
        let now = body["phase"].as_str().unwrap().to_string();
        let call = body["call"].as_str().unwrap_or_default();
        let events: Vec<&str> = body["events"].as_array().unwrap().iter().map(|e| e.as_str().unwrap()).collect();
        match (phase[&id].as_str(), now.as_str()) {
            ("planning", "execution") => assert!(call.starts_with("select("), "{call}"),
            ("execution", "planning") => assert!(call == "stop()" || events.contains(&"task_complete"), "{call}"),
            _ => {}
        }
        let (_, view) = call_state(&app, &id).await;
        assert_eq!(view["phase"], now.as_str());
        assert_eq!(view["exec"].is_null(), now == "planning");
        phase.insert(id, now);
    }
}

async fn call_state(app: &Router, id: &str) -> (StatusCode, Value) {
    call(app, Method::GET, &format!("/api/session/{id}/state"), None).await
}
