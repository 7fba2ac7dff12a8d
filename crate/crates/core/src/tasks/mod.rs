//! Cognitive and psychomotor task engines.

pub mod rt;
pub mod span;

use thiserror::Error;

pub use rt::{
    attach_gaze, crt_summary, first_gaze_on_target, srt_summary, CrtSummary, RtTaskKind, RtTrial,
};
pub use span::{
    corsi_sample_layout, recall_is_correct, SpanDecision, SpanTaskConfig, SpanTaskKind,
    SpanTaskState,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaskError {
    #[error("task already finished")]
    TaskFinished,
    #[error("task not finished yet")]
    TaskNotFinished,
    #[error("span start length {0} outside 2..=7")]
    InvalidStartLength(u8),
    #[error("expected {expected} trials, got {actual}")]
    WrongTrialCount { expected: usize, actual: usize },
    #[error("expected {expected:?} trials, found a {actual:?} trial")]
    WrongTaskKind { expected: RtTaskKind, actual: RtTaskKind },
    #[error("no correct trials")]
    NoCorrectTrials,
    #[error("gaze stream timestamps are not sorted")]
    UnsortedStream,
    #[error("trial timing out of order: onset {onset_ms}, touch {touch_ms}, gaze {gaze_ms:?}")]
    InvalidTrialTiming { onset_ms: i64, touch_ms: i64, gaze_ms: Option<i64> },
}
