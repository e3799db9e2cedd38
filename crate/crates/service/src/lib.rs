//! HTTP front end for the dialogue engine.
//!
//! `POST /chat` takes `{"session_id", "message"}` and answers with
//! `{"reply", "rich", "suggestions", "session_id", "debug"}`; `GET /health`
//! reports readiness, the model fingerprint and the catalog size. Every
//! handled turn is appended to a JSONL log before the reply is sent.
//! Sessions live in memory only and are lost on restart.

mod load;
mod routes;
mod sessions;

use std::path::PathBuf;
use std::time::Duration;

pub use load::{fingerprint, load, LoadError, LoadOptions, Loaded};
pub use routes::{router, serve, spawn_evictor, AppState, ChatReply, ChatRequest};
pub use sessions::Sessions;

pub const MAX_MESSAGE_CHARS: usize = 2000;
pub const MAX_SESSION_ID_CHARS: usize = 128;
pub const SESSION_TTL: Duration = Duration::from_secs(60 * 60);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Dialogue log; `None` disables logging.
    pub log_path: Option<PathBuf>,
    /// Allowed CORS origins; `*` allows any.
    pub cors_origins: Vec<String>,
    pub session_ttl: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            log_path: None,
            cors_origins: vec!["*".into()],
            session_ttl: SESSION_TTL,
        }
    }
}
