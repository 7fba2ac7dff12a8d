//! Event-sourced administration sessions.
//!
//! A session is an append-only log of [`SessionEvent`]s. Replaying the log
//! through [`Session::apply`] rebuilds exactly the live state, so scores are a
//! pure function of the log.

pub mod log;
pub mod protocol;
pub mod script;
pub mod store;

use thiserror::Error;

pub use log::{read_log, replay_log, LogRecord};
pub use protocol::{
    session_plan, Activity, Decision, EventKind, QuestionnaireScore, Segment, Session, SessionEvent, SessionMeta,
    SessionReport, StageSummary, DEFAULT_RIDE_MS, PRE_POST_INSTRUMENTS,
};
pub use script::ScriptedParticipant;
pub use store::{NewSession, SessionStore};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("event seq {got} is not after the last accepted seq {last}")]
    OutOfOrderSeq { last: u64, got: u64 },
    #[error("session already finished")]
    EventAfterFinish,
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("event log: {0}")]
    Log(String),
    #[error("storage: {0}")]
    Storage(String),
}

impl SessionError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::UnknownSession(_) => "unknown_session",
            SessionError::OutOfOrderSeq { .. } => "out_of_order_seq",
            SessionError::EventAfterFinish => "event_after_finish",
            SessionError::InvalidEvent(_) => "invalid_event",
            SessionError::InvalidRequest(_) => "invalid_request",
            SessionError::Log(_) => "log",
            SessionError::Storage(_) => "storage",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ParticipantId;

    fn meta() -> SessionMeta {
        SessionMeta { id: "P01-001".into(), participant: ParticipantId::new("P01"), seed: 9, ride_duration_ms: 1_000 }
    }

    fn run(session: &mut Session, who: &mut ScriptedParticipant) {
        loop {
            let events = who.respond(&session.next_activity());
            if events.is_empty() {
                break;
            }
            for e in events {
                session.apply(e).unwrap();
            }
        }
    }

    #[test]
    fn scripted_run_completes_protocol() {
        let mut s = Session::new(meta());
        run(&mut s, &mut ScriptedParticipant::new(1));
        assert!(s.is_finished());
        let report = s.report();
        assert_eq!(report.stages.len(), 4);
        for st in &report.stages {
            assert!(st.csqvr_vr.is_some() && st.bdst.is_some() && st.bcbt.is_some());
            assert!(st.srt_mean.is_some() && st.crt.is_some() && st.pupil_mean.is_some());
        }
        // 3 pre + 4 in-VR + 3 post
        assert_eq!(report.questionnaires.len(), 10);
    }

    #[test]
    fn seq_and_finish_errors() {
        let mut s = Session::new(meta());
        let mut who = ScriptedParticipant::new(2);
        let first = who.respond(&s.next_activity()).remove(0);
        let mut late = first.clone();
        late.seq = 7;
        s.apply(late).unwrap();
        let mut early = who.respond(&s.next_activity()).remove(0);
        early.seq = 5;
        assert_eq!(s.apply(early), Err(SessionError::OutOfOrderSeq { last: 7, got: 5 }));

        let mut s = Session::new(meta());
        run(&mut s, &mut ScriptedParticipant::new(3));
        let extra = SessionEvent {
            session: String::new(),
            seq: 100_000,
            t: 10_000_000,
            kind: EventKind::StageStarted { segment: Segment::Pre },
        };
        assert_eq!(s.apply(extra), Err(SessionError::EventAfterFinish));
    }

    #[test]
    fn wrong_stimulus_and_short_ride_rejected() {
        let mut s = Session::new(meta());
        let mut who = ScriptedParticipant::new(4);
        while !matches!(s.next_activity(), Activity::SpanTrial { .. }) {
            for e in who.respond(&s.next_activity()) {
                s.apply(e).unwrap();
            }
        }
        let mut e = who.respond(&s.next_activity()).remove(0);
        if let EventKind::SpanTrialResult { stimulus, .. } = &mut e.kind {
            stimulus[0] = (stimulus[0] + 1) % 10;
        }
        assert!(matches!(s.apply(e), Err(SessionError::InvalidEvent(_))));

        let mut s = Session::new(meta());
        while !matches!(s.next_activity(), Activity::Ride { .. }) {
            for e in who.respond(&s.next_activity()) {
                s.apply(e).unwrap();
            }
        }
        let e = SessionEvent {
            session: String::new(),
            seq: s.last_seq().unwrap() + 1,
            t: s.events().last().unwrap().t + 10,
            kind: EventKind::StageCompleted { segment: Segment::Ride(crate::domain::Stage::Ride1) },
        };
        assert!(matches!(s.apply(e), Err(SessionError::InvalidEvent(_))));
    }

    #[test]
    fn event_json_shape() {
        let e = SessionEvent {
            session: "s".into(),
            seq: 3,
            t: 10,
            kind: EventKind::StageStarted { segment: Segment::Assessment(crate::domain::Stage::Ride2) },
        };
        let v: serde_json::Value = serde_json::to_value(&e).unwrap();
        assert_eq!(v["kind"], "stage_started");
        assert_eq!(v["payload"]["segment"], "assessment:ride2");
        let back: SessionEvent = serde_json::from_value(v).unwrap();
        assert_eq!(back, e);
    }
}
