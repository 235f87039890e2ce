//! HTTP/JSON API over the orchestrator.
//!
//! Routes live under `/api`; an optional static directory is served under
//! `/ui`. Every error body has the shape
//! `{"error":{"code":"...","message":"..."}}`.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use oat_core::engine::SystemClock;
use oat_core::orchestrator::{Orchestrator, OrchestratorConfig, OrchestratorError, Session, SessionView, TurnResponse};
use oat_core::parser::{ParserBackend, RemoteBackend, RuleBackend};
use oat_core::search::{load_corpus, RankedResult, SearchError};
use oat_core::Execution;

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_TASKS_K: usize = 10;
pub const GC_INTERVAL: Duration = Duration::from_secs(60);
pub const REMOTE_PARSER_TIMEOUT: Duration = Duration::from_secs(2);

/// Which parser backend to run, as written in `OAT_PARSER_BACKEND`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ParserSpec {
    #[default]
    Rules,
    Remote(String),
}

impl FromStr for ParserSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "rules" => Ok(ParserSpec::Rules),
            other => match other.strip_prefix("remote:") {
                Some(url) if !url.is_empty() => Ok(ParserSpec::Remote(url.to_string())),
                _ => Err(format!("unknown parser backend `{other}`; expected `rules` or `remote:<url>`")),
            },
        }
    }
}

impl ParserSpec {
    pub fn build(&self) -> Arc<dyn ParserBackend> {
        match self {
            ParserSpec::Rules => Arc::new(RuleBackend::default()),
            ParserSpec::Remote(url) => Arc::new(RemoteBackend::new(url.clone(), REMOTE_PARSER_TIMEOUT)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub port: u16,
    pub corpus_dir: PathBuf,
    pub session_ttl_secs: u64,
    pub parser: ParserSpec,
    pub ui_dir: Option<PathBuf>,
    /// Sessions are loaded from here at startup and written back on shutdown.
    pub sessions_file: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            port: DEFAULT_PORT,
            corpus_dir: PathBuf::from("data/corpus"),
            session_ttl_secs: oat_core::orchestrator::DEFAULT_SESSION_TTL_SECS,
            parser: ParserSpec::Rules,
            ui_dir: None,
            sessions_file: None,
        }
    }
}

impl ServerConfig {
    /// Read `OAT_PORT`, `OAT_CORPUS_DIR`, `OAT_SESSION_TTL_MIN`,
    /// `OAT_PARSER_BACKEND`, `OAT_UI_DIR` and `OAT_SESSIONS_FILE` on top of
    /// the defaults.
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let mut cfg = ServerConfig::default();
        if let Some(v) = get("OAT_PORT") {
            cfg.port = v.parse().map_err(|_| format!("OAT_PORT: invalid port `{v}`"))?;
        }
        if let Some(v) = get("OAT_CORPUS_DIR") {
            cfg.corpus_dir = PathBuf::from(v);
        }
        if let Some(v) = get("OAT_SESSION_TTL_MIN") {
            let min: u64 = v.parse().map_err(|_| format!("OAT_SESSION_TTL_MIN: invalid number `{v}`"))?;
            cfg.session_ttl_secs = min * 60;
        }
        if let Some(v) = get("OAT_PARSER_BACKEND") {
            cfg.parser = v.parse()?;
        }
        cfg.ui_dir = get("OAT_UI_DIR").map(PathBuf::from);
        cfg.sessions_file = get("OAT_SESSIONS_FILE").map(PathBuf::from);
        Ok(cfg)
    }
}

/// JSON error envelope with an HTTP status.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<OrchestratorError> for ApiError {
    fn from(e: OrchestratorError) -> Self {
        let (status, code) = match &e {
            OrchestratorError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            OrchestratorError::UnknownTask(_) => (StatusCode::NOT_FOUND, "unknown_task"),
            OrchestratorError::InvalidGraph { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "invalid_graph"),
            OrchestratorError::Search(_) => (StatusCode::BAD_REQUEST, "bad_query"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_query", e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(e.status(), "bad_request", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::new(e.status(), "bad_request", e.body_text())
    }
}

fn join_error(e: tokio::task::JoinError) -> ApiError {
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
}

type Shared = Arc<Orchestrator>;

#[derive(Debug, Serialize, Deserialize)]
pub struct CreatedSession {
    pub session_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct UtteranceBody {
    pub text: String,
}

#[derive(Debug, Default, Deserialize)]
pub struct TasksQuery {
    #[serde(default)]
    pub q: String,
    #[serde(default)]
    pub theme: String,
    pub k: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub corpus_size: usize,
}

async fn create_session(State(orch): State<Shared>) -> (StatusCode, Json<CreatedSession>) {
    let session = orch.create_session();
    (StatusCode::CREATED, Json(CreatedSession { session_id: session.id }))
}

async fn utterance(
    State(orch): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<UtteranceBody>, JsonRejection>,
) -> Result<Json<TurnResponse>, ApiError> {
    let Json(body) = body?;
    // A turn may block on the session lock or a remote parser.
    let resp = tokio::task::spawn_blocking(move || orch.handle_turn(&id, &body.text))
        .await
        .map_err(join_error)??;
    Ok(Json(resp))
}

async fn state(State(orch): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Json<SessionView>, ApiError> {
    let view = tokio::task::spawn_blocking(move || orch.session_state(&id)).await.map_err(join_error)??;
    Ok(Json(view))
}

async fn tasks(
    State(orch): State<Shared>,
    q: Result<Query<TasksQuery>, QueryRejection>,
) -> Result<Json<Vec<RankedResult>>, ApiError> {
    let Query(q) = q?;
    let k = q.k.unwrap_or(DEFAULT_TASKS_K);
    if q.q.trim().is_empty() {
        if k == 0 {
            return Err(SearchError::ZeroK.into());
        }
        return Ok(Json(orch.snapshot().index.browse(&q.theme, k)));
    }
    Ok(Json(orch.search(&q.q, &q.theme, k)?))
}

async fn task(State(orch): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let graph = orch.task(&id).ok_or(OrchestratorError::UnknownTask(id))?;
    Ok(Json(graph.as_ref().clone()).into_response())
}

async fn health(State(orch): State<Shared>) -> Json<Health> {
    Json(Health { status: "ok".into(), corpus_size: orch.corpus_size() })
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

/// The API router, plus `/ui` when a static directory is given.
pub fn router(orch: Arc<Orchestrator>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/session", post(create_session))
        .route("/api/session/{id}/utterance", post(utterance))
        .route("/api/session/{id}/state", get(state))
        .route("/api/tasks", get(tasks))
        .route("/api/tasks/{id}", get(task))
        .route("/api/health", get(health))
        .fallback(not_found)
        .with_state(orch);
    match ui_dir {
        Some(dir) => api.nest_service("/ui", tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

/// Load the corpus and build an orchestrator on the system clock.
pub fn build_orchestrator(cfg: &ServerConfig) -> Result<Arc<Orchestrator>, String> {
    let (corpus, report) =
        load_corpus(&cfg.corpus_dir, Execution::default()).map_err(|e| e.to_string())?;
    tracing::info!(indexed = report.indexed.len(), skipped = report.skipped.len(), "corpus loaded");
    let config = OrchestratorConfig { session_ttl_secs: cfg.session_ttl_secs, exec: Execution::default() };
    let orch = Orchestrator::new(corpus, cfg.parser.build(), Arc::new(SystemClock::new()), config)
        .map_err(|e| e.to_string())?;
    Ok(Arc::new(orch))
}

fn load_sessions(orch: &Orchestrator, path: &Path) {
    let Ok(text) = std::fs::read_to_string(path) else {
        return;
    };
    match serde_json::from_str::<Vec<Session>>(&text) {
        Ok(sessions) => {
            let n = orch.import_sessions(sessions);
            tracing::info!(n, path = %path.display(), "restored sessions");
        }
        Err(e) => tracing::warn!(path = %path.display(), error = %e, "ignoring unreadable session file"),
    }
}

fn save_sessions(orch: &Orchestrator, path: &Path) {
    let sessions = orch.export_sessions();
    let text = serde_json::to_string_pretty(&sessions).expect("sessions serialize");
    if let Err(e) = std::fs::write(path, text) {
        tracing::warn!(path = %path.display(), error = %e, "could not save sessions");
    }
}

/// Serve until Ctrl-C, evicting idle sessions in the background.
pub async fn serve(cfg: ServerConfig) -> Result<(), String> {
    let orch = build_orchestrator(&cfg)?;
    if let Some(path) = &cfg.sessions_file {
        load_sessions(&orch, path);
    }
    let gc = orch.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(GC_INTERVAL);
        loop {
            tick.tick().await;
            let evicted = gc.session_gc(gc.clock().now());
            if evicted > 0 {
                tracing::info!(evicted, "evicted idle sessions");
            }
        }
    });

    let app = router(orch.clone(), cfg.ui_dir.as_deref());
    let addr = SocketAddr::from(([0, 0, 0, 0], cfg.port));
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| format!("bind {addr}: {e}"))?;
    tracing::info!(%addr, corpus_size = orch.corpus_size(), "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| e.to_string())?;
    if let Some(path) = &cfg.sessions_file {
        save_sessions(&orch, path);
    }
    Ok(())
}
