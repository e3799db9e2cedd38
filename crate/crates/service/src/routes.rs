use std::future::Future;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use explainbot_core::corpus::{now_millis, LogTurn, LogWriter};
use explainbot_core::dialogue::{handle_turn, DebugInfo};
use explainbot_core::explain::PlotSpec;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::{Loaded, ServiceConfig, Sessions, MAX_MESSAGE_CHARS, MAX_SESSION_ID_CHARS};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatRequest {
    pub session_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatReply {
    pub reply: String,
    pub rich: Vec<PlotSpec>,
    pub suggestions: Vec<String>,
    pub session_id: String,
    pub debug: DebugInfo,
}

pub struct AppState {
    ready: OnceLock<Loaded>,
    pub sessions: Sessions,
    log: Option<Mutex<LogWriter>>,
    config: ServiceConfig,
    log_failures: AtomicU64,
}

impl AppState {
    /// Opens the log; the model is installed later with [`AppState::install`].
    pub fn new(config: ServiceConfig) -> std::io::Result<Arc<Self>> {
        let log = match &config.log_path {
            Some(p) => Some(Mutex::new(LogWriter::open(p)?)),
            None => None,
        };
        Ok(Arc::new(Self {
            ready: OnceLock::new(),
            sessions: Sessions::new(config.session_ttl),
            log,
            config,
            log_failures: AtomicU64::new(0),
        }))
    }

    /// Marks the service ready. Only the first call has an effect.
    pub fn install(&self, loaded: Loaded) {
        let _ = self.ready.set(loaded);
    }

    pub fn is_ready(&self) -> bool {
        self.ready.get().is_some()
    }

    pub fn log_failures(&self) -> u64 {
        self.log_failures.load(Ordering::Relaxed)
    }

    fn append(&self, turn: &LogTurn) {
        let Some(log) = &self.log else { return };
        let result = log.lock().unwrap_or_else(|e| e.into_inner()).append(turn);
        if let Err(e) = result {
            self.log_failures.fetch_add(1, Ordering::Relaxed);
            tracing::error!(error = %e, "dialogue log write failed");
        }
    }

    pub fn sync_log(&self) {
        if let Some(log) = &self.log {
            if let Err(e) = log.lock().unwrap_or_else(|e| e.into_inner()).sync() {
                tracing::error!(error = %e, "dialogue log sync failed");
            }
        }
    }
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(json!({ "error": msg.into() }))).into_response()
}

async fn health(State(app): State<Arc<AppState>>) -> Response {
    match app.ready.get() {
        None => (StatusCode::SERVICE_UNAVAILABLE, Json(json!({ "status": "loading" }))).into_response(),
        Some(l) => Json(json!({
            "status": "ok",
            "model_fingerprint": l.fingerprint,
            "catalog_size": l.catalog_size,
            "sessions": app.sessions.len(),
            "log_failures": app.log_failures(),
        }))
        .into_response(),
    }
}

async fn chat(State(app): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: ChatRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed body: {e}")),
    };
    if req.session_id.is_empty() || req.session_id.chars().count() > MAX_SESSION_ID_CHARS {
        return error(StatusCode::BAD_REQUEST, format!("session_id must have 1 to {MAX_SESSION_ID_CHARS} characters"));
    }
    if req.message.chars().count() > MAX_MESSAGE_CHARS {
        return error(StatusCode::PAYLOAD_TOO_LARGE, format!("message longer than {MAX_MESSAGE_CHARS} characters"));
    }
    let Some(loaded) = app.ready.get() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "model is loading");
    };
    let session = app.sessions.get_or_create(&req.session_id);
    let mut session = session.lock_owned().await;
    let state = session.state.clone();
    let deps = loaded.deps.clone();
    let text = req.message.clone();
    let outcome = tokio::task::spawn_blocking(move || handle_turn(&state, &text, &deps)).await;
    let timestamp = now_millis().max(session.last_ts);
    session.last_ts = timestamp;
    session.last_seen = Instant::now();
    let mut turn = LogTurn {
        session_id: req.session_id.clone(),
        timestamp,
        user_text: req.message,
        intent: "error".into(),
        entities: Default::default(),
        reply_text: String::new(),
    };
    match outcome {
        Ok((next, resp)) => {
            turn.intent = resp.debug.intent.clone();
            turn.entities = resp.debug.entities.clone();
            turn.reply_text = resp.text.clone();
            app.append(&turn);
            session.state = next;
            Json(ChatReply {
                reply: resp.text,
                rich: resp.rich,
                suggestions: resp.suggestions,
                session_id: req.session_id,
                debug: resp.debug,
            })
            .into_response()
        }
        Err(e) => {
            tracing::error!(error = %e, session = %turn.session_id, "turn failed");
            turn.reply_text = "internal error".into();
            app.append(&turn);
            error(StatusCode::INTERNAL_SERVER_ERROR, "internal error")
        }
    }
}

fn cors(origins: &[String]) -> CorsLayer {
    let allow = if origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
}

pub fn router(app: Arc<AppState>) -> Router {
    let layer = cors(&app.config.cors_origins);
    Router::new()
        .route("/chat", post(chat))
        .route("/health", get(health))
        .layer(layer)
        .with_state(app)
}

/// Evicts idle sessions once a minute until the returned task is aborted.
pub fn spawn_evictor(app: Arc<AppState>) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let n = app.sessions.evict_idle(Instant::now());
            if n > 0 {
                tracing::info!(evicted = n, "idle sessions dropped");
            }
        }
    })
}

/// Serves until `shutdown` resolves, then flushes the log.
pub async fn serve(
    listener: tokio::net::TcpListener,
    app: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let evictor = spawn_evictor(app.clone());
    let result = axum::serve(listener, router(app.clone())).with_graceful_shutdown(shutdown).await;
    evictor.abort();
    app.sync_log();
    result
}
