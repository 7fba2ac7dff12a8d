use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{
    GazeSample, ParseEnumError, ParticipantId, ParticipantRecord, Pupil, QuestionnaireResponse,
    Stage,
};
use crate::tasks::{RtTaskKind, RtTrial, SpanTaskKind};

/// Gaze episode recorded while answering the in-VR CSQ-VR.
pub const QUESTIONNAIRE_EPISODE: &str = "csqvr";

/// Gaze episode name for one CRT trial.
pub fn crt_episode(trial_index: u32) -> String {
    format!("crt-{trial_index}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    #[serde(rename = "BDST")]
    Bdst,
    #[serde(rename = "BCBT")]
    Bcbt,
    #[serde(rename = "SRT")]
    Srt,
    #[serde(rename = "CRT")]
    Crt,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [TaskKind::Bdst, TaskKind::Bcbt, TaskKind::Srt, TaskKind::Crt];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Bdst => "BDST",
            TaskKind::Bcbt => "BCBT",
            TaskKind::Srt => "SRT",
            TaskKind::Crt => "CRT",
        }
    }

    pub fn span(self) -> Option<SpanTaskKind> {
        match self {
            TaskKind::Bdst => Some(SpanTaskKind::Bdst),
            TaskKind::Bcbt => Some(SpanTaskKind::Bcbt),
            _ => None,
        }
    }

    pub fn rt(self) -> Option<RtTaskKind> {
        match self {
            TaskKind::Srt => Some(RtTaskKind::Srt),
            TaskKind::Crt => Some(RtTaskKind::Crt),
            _ => None,
        }
    }
}

impl From<SpanTaskKind> for TaskKind {
    fn from(k: SpanTaskKind) -> Self {
        match k {
            SpanTaskKind::Bdst => TaskKind::Bdst,
            SpanTaskKind::Bcbt => TaskKind::Bcbt,
        }
    }
}

impl From<RtTaskKind> for TaskKind {
    fn from(k: RtTaskKind) -> Self {
        match k {
            RtTaskKind::Srt => TaskKind::Srt,
            RtTaskKind::Crt => TaskKind::Crt,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ParseEnumError { kind: "task", value: s.to_owned() })
    }
}

/// One row of `trials.csv`. Span trials leave the timing columns empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRow {
    pub participant: ParticipantId,
    pub stage: Stage,
    pub task: TaskKind,
    pub trial_index: u32,
    /// Sequence length for span tasks, lit target for reaction tasks.
    pub length_or_target: u8,
    pub correct: bool,
    pub onset_ms: Option<i64>,
    pub touch_ms: Option<i64>,
    pub gaze_on_target_ms: Option<i64>,
}

impl TrialRow {
    pub fn from_rt(participant: &ParticipantId, stage: Stage, trial_index: u32, t: &RtTrial) -> Self {
        Self {
            participant: participant.clone(),
            stage,
            task: t.task.into(),
            trial_index,
            length_or_target: t.target,
            correct: t.correct,
            onset_ms: Some(t.onset_ms),
            touch_ms: Some(t.touch_ms),
            gaze_on_target_ms: t.gaze_on_target_ms,
        }
    }

    pub fn span(participant: &ParticipantId, stage: Stage, task: SpanTaskKind, trial_index: u32, length: u8, correct: bool) -> Self {
        Self {
            participant: participant.clone(),
            stage,
            task: task.into(),
            trial_index,
            length_or_target: length,
            correct,
            onset_ms: None,
            touch_ms: None,
            gaze_on_target_ms: None,
        }
    }

    /// Reaction-time view of the row; `None` for span rows or missing timing.
    pub fn to_rt(&self) -> Option<RtTrial> {
        Some(RtTrial {
            task: self.task.rt()?,
            target: self.length_or_target,
            correct: self.correct,
            onset_ms: self.onset_ms?,
            touch_ms: self.touch_ms?,
            gaze_on_target_ms: self.gaze_on_target_ms,
        })
    }
}

/// One row of `gaze.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeRow {
    pub participant: ParticipantId,
    pub stage: Stage,
    pub episode: String,
    pub sample: GazeSample,
}

impl GazeRow {
    pub fn new(participant: &ParticipantId, stage: Stage, episode: &str, t: i64, hit: bool, left: Pupil, right: Pupil) -> Self {
        Self {
            participant: participant.clone(),
            stage,
            episode: episode.to_owned(),
            sample: GazeSample { t, gaze_target_hit: hit, pupil_left: left, pupil_right: right },
        }
    }
}

/// Validated cohort data as held in memory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CohortDataset {
    pub participants: Vec<ParticipantRecord>,
    pub responses: Vec<QuestionnaireResponse>,
    pub trials: Vec<TrialRow>,
    pub gaze: Vec<GazeRow>,
}

impl CohortDataset {
    pub fn participant_ids(&self) -> Vec<ParticipantId> {
        let mut ids: Vec<ParticipantId> = self
            .participants
            .iter()
            .map(|p| p.id.clone())
            .chain(self.responses.iter().map(|r| r.participant.clone()))
            .chain(self.trials.iter().map(|t| t.participant.clone()))
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn merge(&mut self, other: CohortDataset) {
        self.participants.extend(other.participants);
        self.responses.extend(other.responses);
        self.trials.extend(other.trials);
        self.gaze.extend(other.gaze);
    }
}
