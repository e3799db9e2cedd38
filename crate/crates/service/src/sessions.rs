use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use explainbot_core::dialogue::SessionState;

#[derive(Debug)]
pub(crate) struct Session {
    pub state: SessionState,
    pub last_seen: Instant,
    /// Last logged timestamp, kept so log times never go backwards.
    pub last_ts: u64,
}

/// In-memory sessions, each behind its own async mutex so turns of one
/// session run one at a time.
#[derive(Debug)]
pub struct Sessions {
    map: Mutex<HashMap<String, Arc<tokio::sync::Mutex<Session>>>>,
    ttl: Duration,
}

impl Sessions {
    pub fn new(ttl: Duration) -> Self {
        Self {
            map: Mutex::new(HashMap::new()),
            ttl,
        }
    }

    pub(crate) fn get_or_create(&self, id: &str) -> Arc<tokio::sync::Mutex<Session>> {
        let mut map = self.map.lock().unwrap();
        map.entry(id.to_string())
            .or_insert_with(|| {
                Arc::new(tokio::sync::Mutex::new(Session {
                    state: SessionState::default(),
                    last_seen: Instant::now(),
                    last_ts: 0,
                }))
            })
            .clone()
    }

    /// Drops sessions idle for longer than the TTL at `now`. Sessions with a
    /// turn in progress are kept.
    pub fn evict_idle(&self, now: Instant) -> usize {
        let mut map = self.map.lock().unwrap();
        let before = map.len();
        map.retain(|_, s| match s.try_lock() {
            Ok(s) => now.saturating_duration_since(s.last_seen) <= self.ttl,
            Err(_) => true,
        });
        before - map.len()
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state(&self, id: &str) -> Option<SessionState> {
        let s = self.map.lock().unwrap().get(id)?.clone();
        let s = s.try_lock().ok()?;
        Some(s.state.clone())
    }
}
