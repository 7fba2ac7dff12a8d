//! JSON-lines persistence: one header record, then one record per event.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Session, SessionError, SessionEvent, SessionMeta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Session(SessionMeta),
    Event(SessionEvent),
}

fn storage(e: impl std::fmt::Display) -> SessionError {
    SessionError::Storage(e.to_string())
}

pub(crate) fn line(record: &LogRecord) -> String {
    let mut s = serde_json::to_string(record).expect("log records serialize");
    s.push('\n');
    s
}

pub(crate) fn create_log(path: &Path, meta: &SessionMeta) -> Result<(), SessionError> {
    let mut f = OpenOptions::new().write(true).create_new(true).open(path).map_err(storage)?;
    f.write_all(line(&LogRecord::Session(meta.clone())).as_bytes()).map_err(storage)?;
    f.sync_data().map_err(storage)
}

/// Appends a batch in a single write so a batch is never half-persisted by us.
pub(crate) fn append_events(path: &Path, events: &[SessionEvent]) -> Result<(), SessionError> {
    let buf: String = events.iter().map(|e| line(&LogRecord::Event(e.clone()))).collect();
    let mut f = OpenOptions::new().append(true).open(path).map_err(storage)?;
    f.write_all(buf.as_bytes()).map_err(storage)?;
    f.sync_data().map_err(storage)
}

/// Parses a log into its header and events.
pub fn read_log(path: &Path) -> Result<(SessionMeta, Vec<SessionEvent>), SessionError> {
    let f = File::open(path).map_err(storage)?;
    let mut meta = None;
    let mut events = Vec::new();
    for (i, l) in BufReader::new(f).lines().enumerate() {
        let l = l.map_err(storage)?;
        if l.trim().is_empty() {
            continue;
        }
        let rec: LogRecord =
            serde_json::from_str(&l).map_err(|e| SessionError::Log(format!("line {}: {e}", i + 1)))?;
        match (rec, &meta) {
            (LogRecord::Session(m), None) => meta = Some(m),
            (LogRecord::Session(_), Some(_)) => {
                return Err(SessionError::Log(format!("line {}: second session header", i + 1)))
            }
            (LogRecord::Event(_), None) => return Err(SessionError::Log("log does not start with a session header".into())),
            (LogRecord::Event(e), Some(_)) => events.push(e),
        }
    }
    let meta = meta.ok_or_else(|| SessionError::Log("empty log".into()))?;
    Ok((meta, events))
}

/// Rebuilds a session by re-applying every logged event.
pub fn replay_log(path: &Path) -> Result<Session, SessionError> {
    let (meta, events) = read_log(path)?;
    let mut session = Session::new(meta);
    for (i, e) in events.into_iter().enumerate() {
        session.apply(e).map_err(|err| SessionError::Log(format!("event {}: {err}", i + 1)))?;
    }
    Ok(session)
}
