use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::nlu::EntitySet;

/// One logged dialogue turn, stored as a single JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogTurn {
    pub session_id: String,
    /// UTC, milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub user_text: String,
    pub intent: String,
    #[serde(default)]
    pub entities: EntitySet,
    pub reply_text: String,
}

impl LogTurn {
    fn line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("log turns serialize");
        s.push('\n');
        s
    }
}

pub fn now_millis() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Append-only log file. Each record goes out in one `write_all` of a
/// complete line on an `O_APPEND` handle.
#[derive(Debug)]
pub struct LogWriter {
    file: File,
}

impl LogWriter {
    /// Opens or creates `path`. A torn last line left by a crash is
    /// terminated so the next record starts on its own line.
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let mut file = OpenOptions::new().create(true).append(true).read(true).open(path)?;
        let len = file.metadata()?.len();
        if len > 0 {
            let mut last = [0u8];
            file.seek(SeekFrom::Start(len - 1))?;
            file.read_exact(&mut last)?;
            if last[0] != b'\n' {
                file.write_all(b"\n")?;
            }
        }
        Ok(Self { file })
    }

    pub fn append(&mut self, turn: &LogTurn) -> std::io::Result<()> {
        self.file.write_all(turn.line().as_bytes())?;
        self.file.flush()
    }

    pub fn sync(&self) -> std::io::Result<()> {
        self.file.sync_data()
    }
}

pub fn append_log(turn: &LogTurn, path: &Path) -> std::io::Result<()> {
    LogWriter::open(path)?.append(turn)
}

/// The turns of one session in timestamp order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conversation {
    pub session_id: String,
    pub turns: Vec<LogTurn>,
}

impl Conversation {
    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCorpus {
    /// In order of each session's first line.
    pub conversations: Vec<Conversation>,
    pub malformed: usize,
    /// The file ended in an unterminated line, which was ignored.
    pub partial_tail: bool,
}

/// Groups log lines by session. Blank lines are ignored, unparseable lines
/// counted in `malformed`.
pub fn parse_log(text: &str) -> LoadedCorpus {
    let mut pieces: Vec<&str> = text.split('\n').collect();
    let tail = pieces.pop().unwrap_or("");
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut conversations: Vec<Conversation> = Vec::new();
    let mut malformed = 0;
    for line in pieces {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let Ok(turn) = serde_json::from_str::<LogTurn>(line) else {
            malformed += 1;
            continue;
        };
        let i = *index.entry(turn.session_id.clone()).or_insert_with(|| {
            conversations.push(Conversation {
                session_id: turn.session_id.clone(),
                turns: Vec::new(),
            });
            conversations.len() - 1
        });
        conversations[i].turns.push(turn);
    }
    for c in &mut conversations {
        c.turns.sort_by_key(|t| t.timestamp);
    }
    LoadedCorpus {
        conversations,
        malformed,
        partial_tail: !tail.trim().is_empty(),
    }
}

pub fn load_corpus(path: &Path) -> Result<LoadedCorpus, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    let loaded = parse_log(&text);
    if loaded.conversations.is_empty() {
        return Err(CorpusError::NoData);
    }
    Ok(loaded)
}
