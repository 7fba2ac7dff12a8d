//! Concurrent session registry backed by one log file per session.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::log::{append_events, create_log, replay_log};
use super::{Activity, Decision, Segment, Session, SessionError, SessionEvent, SessionMeta, SessionReport, DEFAULT_RIDE_MS};
use crate::domain::ParticipantId;

/// Body of a session-creation request.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewSession {
    pub participant: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub ride_duration_ms: Option<i64>,
}

pub struct SessionStore {
    dir: PathBuf,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

fn valid_id_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_'
}

impl SessionStore {
    /// Opens `dir`, replaying every `*.jsonl` log already there.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, SessionError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| SessionError::Storage(e.to_string()))?;
        let mut sessions = HashMap::new();
        let entries = std::fs::read_dir(&dir).map_err(|e| SessionError::Storage(e.to_string()))?;
        for entry in entries {
            let path = entry.map_err(|e| SessionError::Storage(e.to_string()))?.path();
            if path.extension().is_some_and(|e| e == "jsonl") {
                let s = replay_log(&path)?;
                sessions.insert(s.meta.id.clone(), Arc::new(Mutex::new(s)));
            }
        }
        Ok(Self { dir, sessions: Mutex::new(sessions) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn log_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    pub fn create(&self, req: NewSession) -> Result<(SessionMeta, Vec<Segment>), SessionError> {
        let participant = req.participant.trim().to_owned();
        if participant.is_empty() || !participant.chars().all(valid_id_char) {
            return Err(SessionError::InvalidRequest("participant must be non-empty [A-Za-z0-9_-]".into()));
        }
        let ride_duration_ms = req.ride_duration_ms.unwrap_or(DEFAULT_RIDE_MS);
        if ride_duration_ms < 0 {
            return Err(SessionError::InvalidRequest("ride_duration_ms must be non-negative".into()));
        }
        let seed = req.seed.unwrap_or_else(rand::random);
        let mut sessions = self.sessions.lock().expect("store lock");
        let id = (1..)
            .map(|n| format!("{participant}-{n:03}"))
            .find(|id| !sessions.contains_key(id) && !self.log_path(id).exists())
            .expect("unbounded id space");
        let meta = SessionMeta { id: id.clone(), participant: ParticipantId(participant), seed, ride_duration_ms };
        create_log(&self.log_path(&id), &meta)?;
        let session = Session::new(meta.clone());
        let plan = session.plan().to_vec();
        sessions.insert(id, Arc::new(Mutex::new(session)));
        Ok((meta, plan))
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        self.sessions
            .lock()
            .expect("store lock")
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession(id.to_owned()))
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.lock().expect("store lock").keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Runs `f` with the session locked; sessions are processed serially.
    pub fn with<T>(&self, id: &str, f: impl FnOnce(&Session) -> T) -> Result<T, SessionError> {
        let s = self.get(id)?;
        let guard = s.lock().expect("session lock");
        Ok(f(&guard))
    }

    pub fn next(&self, id: &str) -> Result<Activity, SessionError> {
        self.with(id, Session::next_activity)
    }

    pub fn report(&self, id: &str) -> Result<SessionReport, SessionError> {
        self.with(id, Session::report)
    }

    /// Applies a batch atomically: either every event is accepted and
    /// persisted, or none is.
    pub fn append(&self, id: &str, events: Vec<SessionEvent>) -> Result<(Vec<Decision>, Activity), SessionError> {
        let s = self.get(id)?;
        let mut guard = s.lock().expect("session lock");
        let mut draft = guard.clone();
        let mut decisions = Vec::with_capacity(events.len());
        for e in events {
            decisions.push(draft.apply(e)?);
        }
        let fresh = &draft.events()[guard.events().len()..];
        append_events(&self.log_path(id), fresh)?;
        *guard = draft;
        Ok((decisions, guard.next_activity()))
    }
}
