//! Append-only JSON-lines event log and replay.
//!
//! One line per state-changing call:
//!
//! ```json
//! {"session_id":"...","at":1700000000000,"type":"toss","toss_index":3,"coins":["heads","tails","tails"]}
//! ```
//!
//! Replay feeds each event through the same [`Session`] methods used live and
//! cross-checks everything the log restates (coins, mock readings).

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use yao_core::interpret::{mock_reading, Inquiry, PromptOptions, Reading, MOCK_PROVIDER_ID};
use yao_core::music::GenParams;
use yao_core::{Coin, Corpus};

use crate::error::SessionError;
use crate::session::Session;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogEvent {
    Created { seed: u64, params: GenParams },
    Inquiry { inquiry: Inquiry },
    Toss { toss_index: u8, coins: [Coin; 3] },
    Interpreted { include_name: bool, reading: Reading },
    Completed,
    Reset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub session_id: String,
    /// Milliseconds since the Unix epoch.
    pub at: u64,
    #[serde(flatten)]
    pub event: LogEvent,
}

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl EventLog {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, SessionError> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes one record as a single line and flushes it.
    pub fn append(&self, record: &LogRecord) -> Result<(), SessionError> {
        let mut line = serde_json::to_vec(record).map_err(|e| SessionError::Internal(e.to_string()))?;
        line.push(b'\n');
        let mut file = self.file.lock().unwrap_or_else(|p| p.into_inner());
        file.write_all(&line)?;
        file.flush()?;
        Ok(())
    }
}

/// Applies one logged event to the session it belongs to.
pub fn apply_event(session: Option<Session>, record: &LogRecord, corpus: &Corpus) -> Result<Session, SessionError> {
    let corrupt = |why: String| SessionError::LogCorrupt(format!("session {}: {why}", record.session_id));
    let at = record.at;
    if let LogEvent::Created { seed, params } = &record.event {
        if session.is_some() {
            return Err(corrupt("created twice".into()));
        }
        return Ok(Session::new(record.session_id.clone(), *seed, params.clone(), at));
    }
    let mut s = session.ok_or_else(|| corrupt("event before creation".into()))?;
    let step = |r: Result<(), SessionError>| r.map_err(|e| corrupt(e.to_string()));
    match &record.event {
        LogEvent::Created { .. } => unreachable!("handled above"),
        LogEvent::Inquiry { inquiry } => step(s.submit_inquiry(inquiry.clone(), at))?,
        LogEvent::Toss { toss_index, coins } => {
            let out = s.perform_toss(at).map_err(|e| corrupt(e.to_string()))?;
            if out.toss_index != *toss_index || out.toss.coins() != *coins {
                return Err(corrupt(format!("toss {toss_index} does not reproduce")));
            }
        }
        LogEvent::Interpreted { include_name, reading } => {
            let doc = s
                .prompt_document(
                    corpus,
                    PromptOptions {
                        include_name: *include_name,
                    },
                )
                .map_err(|e| corrupt(e.to_string()))?;
            if reading.provider == MOCK_PROVIDER_ID && mock_reading(&doc) != *reading {
                return Err(corrupt("mock reading does not reproduce".into()));
            }
            step(s.apply_reading(reading.clone(), at))?;
        }
        LogEvent::Completed => step(s.complete(at))?,
        LogEvent::Reset => s.reset(at),
    }
    Ok(s)
}

/// Rebuilds every session in the log.
pub fn replay_log(path: impl AsRef<Path>, corpus: &Corpus) -> Result<BTreeMap<String, Session>, SessionError> {
    replay_filtered(path.as_ref(), corpus, None)
}

/// Rebuilds one session from its logged events.
pub fn replay_session(path: impl AsRef<Path>, session_id: &str, corpus: &Corpus) -> Result<Session, SessionError> {
    replay_filtered(path.as_ref(), corpus, Some(session_id))?
        .remove(session_id)
        .ok_or_else(|| SessionError::UnknownSession(session_id.to_owned()))
}

fn replay_filtered(
    path: &Path,
    corpus: &Corpus,
    only: Option<&str>,
) -> Result<BTreeMap<String, Session>, SessionError> {
    let reader = BufReader::new(File::open(path)?);
    let mut sessions = BTreeMap::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LogRecord =
            serde_json::from_str(&line).map_err(|e| SessionError::LogCorrupt(format!("line {}: {e}", n + 1)))?;
        if only.is_some_and(|id| id != record.session_id) {
            continue;
        }
        let current = sessions.remove(&record.session_id);
        let next = apply_event(current, &record, corpus)?;
        sessions.insert(record.session_id.clone(), next);
    }
    Ok(sessions)
}
