//! Protocol order, event payloads and the per-session state machine.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SessionError;
use crate::domain::{
    validate_items, GazeSample, Instrument, ParticipantId, QuestionnaireResponse, ScoreReport, Stage, Timepoint,
};
use crate::io::{crt_episode, CohortDataset, GazeRow, TrialRow, QUESTIONNAIRE_EPISODE};
use crate::scoring::score_all_variants;
use crate::stats::pupil_mean;
use crate::tasks::rt::{attach_gaze, crt_summary, srt_summary, CRT_TARGETS};
use crate::tasks::{
    corsi_sample_layout, recall_is_correct, CrtSummary, RtTaskKind, RtTrial, SpanDecision, SpanTaskConfig,
    SpanTaskKind, SpanTaskState,
};

/// Default ride placeholder: five minutes.
pub const DEFAULT_RIDE_MS: i64 = 300_000;

pub const PRE_POST_INSTRUMENTS: [Instrument; 3] = [Instrument::CsqvrPaper, Instrument::Ssq, Instrument::Vrsq];

/// A block of the session. Serialized as `pre`, `assessment:<stage>`,
/// `ride:<stage>` or `post`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Segment {
    Pre,
    Assessment(Stage),
    Ride(Stage),
    Post,
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Segment::Pre => f.write_str("pre"),
            Segment::Post => f.write_str("post"),
            Segment::Assessment(s) => write!(f, "assessment:{s}"),
            Segment::Ride(s) => write!(f, "ride:{s}"),
        }
    }
}

impl FromStr for Segment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "pre" => Ok(Segment::Pre),
            None if s == "post" => Ok(Segment::Post),
            Some(("assessment", st)) => st.parse().map(Segment::Assessment).map_err(|e| e.to_string()),
            Some(("ride", st)) => match st.parse::<Stage>() {
                Ok(st) if st.is_ride() => Ok(Segment::Ride(st)),
                _ => Err(format!("bad ride stage `{st}`")),
            },
            _ => Err(format!("unknown segment `{s}`")),
        }
    }
}

impl From<Segment> for String {
    fn from(s: Segment) -> Self {
        s.to_string()
    }
}

impl TryFrom<String> for Segment {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Full session order: pre questionnaires, baseline assessment, then each
/// ride placeholder followed by its assessment, then post questionnaires.
pub fn session_plan() -> Vec<Segment> {
    let mut plan = vec![Segment::Pre];
    for stage in Stage::ALL {
        if stage.is_ride() {
            plan.push(Segment::Ride(stage));
        }
        plan.push(Segment::Assessment(stage));
    }
    plan.push(Segment::Post);
    plan
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Questionnaire,
    Span(SpanTaskKind),
    Rt(RtTaskKind),
}

const ASSESSMENT_PHASES: [Phase; 5] = [
    Phase::Questionnaire,
    Phase::Span(SpanTaskKind::Bdst),
    Phase::Span(SpanTaskKind::Bcbt),
    Phase::Rt(RtTaskKind::Srt),
    Phase::Rt(RtTaskKind::Crt),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub id: String,
    pub participant: ParticipantId,
    pub seed: u64,
    pub ride_duration_ms: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    StageStarted {
        segment: Segment,
    },
    QuestionnaireAnswer {
        timepoint: Timepoint,
        instrument: Instrument,
        items: Vec<u8>,
    },
    /// The client echoes the stimulus it was shown with the recalled sequence.
    SpanTrialResult {
        task: SpanTaskKind,
        trial_index: u32,
        stimulus: Vec<u8>,
        response: Vec<u8>,
    },
    RtTrialResult {
        task: RtTaskKind,
        trial_index: u32,
        target: u8,
        chosen: u8,
        onset_ms: i64,
        touch_ms: i64,
        #[serde(default)]
        gaze_on_target_ms: Option<i64>,
    },
    GazeBatch {
        episode: String,
        samples: Vec<GazeSample>,
    },
    StageCompleted {
        segment: Segment,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::StageStarted { .. } => "stage_started",
            EventKind::QuestionnaireAnswer { .. } => "questionnaire_answer",
            EventKind::SpanTrialResult { .. } => "span_trial_result",
            EventKind::RtTrialResult { .. } => "rt_trial_result",
            EventKind::GazeBatch { .. } => "gaze_batch",
            EventKind::StageCompleted { .. } => "stage_completed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    /// Filled in by the server when a client omits it.
    #[serde(default)]
    pub session: String,
    pub seq: u64,
    /// Milliseconds since session start.
    pub t: i64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// What the participant should do next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "activity", rename_all = "snake_case")]
pub enum Activity {
    StartSegment { segment: Segment },
    Questionnaire { timepoint: Timepoint, instrument: Instrument, item_count: usize, min: u8, max: u8 },
    Ride { stage: Stage, duration_ms: i64, started_at: i64 },
    SpanTrial {
        stage: Stage,
        task: SpanTaskKind,
        trial_index: u32,
        length: u8,
        stimulus: Vec<u8>,
        /// Lattice positions of the nine Corsi boxes (Corsi only).
        #[serde(skip_serializing_if = "Option::is_none")]
        layout: Option<Vec<[u8; 3]>>,
    },
    RtTrial { stage: Stage, task: RtTaskKind, trial_index: u32, target: u8 },
    CompleteSegment { segment: Segment },
    Finished,
}

/// Server-side outcome of one accepted event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    Recorded { seq: u64 },
    Span { seq: u64, correct: bool, finished: bool, next_length: Option<u8> },
    Rt { seq: u64, correct: bool, reaction_time_ms: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireScore {
    pub timepoint: Timepoint,
    pub reports: Vec<ScoreReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: Stage,
    pub csqvr_vr: Option<ScoreReport>,
    pub bdst: Option<u32>,
    pub bcbt: Option<u32>,
    pub srt_mean: Option<f64>,
    pub crt: Option<CrtSummary>,
    pub pupil_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub session: String,
    pub participant: ParticipantId,
    pub finished: bool,
    pub events: usize,
    pub questionnaires: Vec<QuestionnaireScore>,
    pub stages: Vec<StageSummary>,
}

#[derive(Debug, Clone, PartialEq)]
struct Progress {
    segment: usize,
    started: bool,
    started_t: i64,
    phase: usize,
    span: Option<SpanTaskState>,
    span_index: u32,
    rt_index: u32,
}

/// One live or replayed session. All adaptive decisions are delegated to the
/// task engines.
#[derive(Debug, Clone)]
pub struct Session {
    pub meta: SessionMeta,
    plan: Vec<Segment>,
    progress: Progress,
    last_seq: Option<u64>,
    last_t: i64,
    events: Vec<SessionEvent>,
    data: CohortDataset,
    span_scores: BTreeMap<(Stage, SpanTaskKind), u32>,
}

fn invalid(msg: impl Into<String>) -> SessionError {
    SessionError::InvalidEvent(msg.into())
}

impl Session {
    pub fn new(meta: SessionMeta) -> Self {
        Self {
            meta,
            plan: session_plan(),
            progress: Progress { segment: 0, started: false, started_t: 0, phase: 0, span: None, span_index: 0, rt_index: 0 },
            last_seq: None,
            last_t: 0,
            events: Vec::new(),
            data: CohortDataset::default(),
            span_scores: BTreeMap::new(),
        }
    }

    pub fn plan(&self) -> &[Segment] {
        &self.plan
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn last_seq(&self) -> Option<u64> {
        self.last_seq
    }

    pub fn is_finished(&self) -> bool {
        self.progress.segment >= self.plan.len()
    }

    /// Everything recorded so far in dataset form.
    pub fn dataset(&self) -> &CohortDataset {
        &self.data
    }

    fn segment(&self) -> Option<Segment> {
        self.plan.get(self.progress.segment).copied()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.meta.seed);
        rng.set_stream(stream);
        rng
    }

    fn stream_id(stage: Stage, task: u64, trial: u32) -> u64 {
        ((stage.index() as u64 + 1) << 40) | (task << 32) | u64::from(trial)
    }

    /// Nine Corsi box positions, fixed per session.
    pub fn corsi_layout(&self) -> Vec<[u8; 3]> {
        corsi_sample_layout(&mut self.rng(0))
    }

    fn span_stimulus(&self, stage: Stage, kind: SpanTaskKind, state: &SpanTaskState, trial: u32) -> Vec<u8> {
        let code = match kind {
            SpanTaskKind::Bdst => 1,
            SpanTaskKind::Bcbt => 2,
        };
        state
            .next_sequence(&mut self.rng(Self::stream_id(stage, code, trial)))
            .expect("stimulus requested only for an unfinished task")
    }

    fn rt_target(&self, stage: Stage, task: RtTaskKind, trial: u32) -> u8 {
        match task {
            RtTaskKind::Srt => 0,
            RtTaskKind::Crt => self.rng(Self::stream_id(stage, 3, trial)).random_range(0..CRT_TARGETS),
        }
    }

    fn phase(&self) -> Option<Phase> {
        match self.segment()? {
            Segment::Pre | Segment::Post => {
                (self.progress.phase < PRE_POST_INSTRUMENTS.len()).then_some(Phase::Questionnaire)
            }
            Segment::Assessment(_) => ASSESSMENT_PHASES.get(self.progress.phase).copied(),
            Segment::Ride(_) => None,
        }
    }

    fn span_state(&self, kind: SpanTaskKind) -> SpanTaskState {
        self.progress.span.clone().unwrap_or_else(|| SpanTaskState::new(SpanTaskConfig::default_for(kind)))
    }

    pub fn next_activity(&self) -> Activity {
        let Some(segment) = self.segment() else { return Activity::Finished };
        if !self.progress.started {
            return Activity::StartSegment { segment };
        }
        let stage = match segment {
            Segment::Ride(stage) => {
                return Activity::Ride {
                    stage,
                    duration_ms: self.meta.ride_duration_ms,
                    started_at: self.progress.started_t,
                };
            }
            Segment::Assessment(s) => Some(s),
            Segment::Pre | Segment::Post => None,
        };
        match (self.phase(), stage) {
            (None, _) => Activity::CompleteSegment { segment },
            (Some(Phase::Questionnaire), None) => {
                let instrument = PRE_POST_INSTRUMENTS[self.progress.phase];
                let timepoint = if segment == Segment::Pre { Timepoint::Pre } else { Timepoint::Post };
                questionnaire_activity(timepoint, instrument)
            }
            (Some(Phase::Questionnaire), Some(s)) => questionnaire_activity(s.into(), Instrument::CsqvrVr),
            (Some(Phase::Span(kind)), Some(stage)) => {
                let state = self.span_state(kind);
                Activity::SpanTrial {
                    stage,
                    task: kind,
                    trial_index: self.progress.span_index,
                    length: state.current_length,
                    stimulus: self.span_stimulus(stage, kind, &state, self.progress.span_index),
                    layout: (kind == SpanTaskKind::Bcbt).then(|| self.corsi_layout()),
                }
            }
            (Some(Phase::Rt(task)), Some(stage)) => Activity::RtTrial {
                stage,
                task,
                trial_index: self.progress.rt_index,
                target: self.rt_target(stage, task, self.progress.rt_index),
            },
            (Some(_), None) => unreachable!("tasks only run inside assessments"),
        }
    }

    fn advance_phase(&mut self) {
        self.progress.phase += 1;
        self.progress.span = None;
        self.progress.span_index = 0;
        self.progress.rt_index = 0;
    }

    /// Validates and applies one event.
    pub fn apply(&mut self, mut event: SessionEvent) -> Result<Decision, SessionError> {
        if self.is_finished() {
            return Err(SessionError::EventAfterFinish);
        }
        if event.session.is_empty() {
            event.session = self.meta.id.clone();
        } else if event.session != self.meta.id {
            return Err(invalid(format!("event for session {} posted to {}", event.session, self.meta.id)));
        }
        if let Some(last) = self.last_seq {
            if event.seq <= last {
                return Err(SessionError::OutOfOrderSeq { last, got: event.seq });
            }
        }
        if event.t < self.last_t {
            return Err(invalid(format!("event time {} precedes {}", event.t, self.last_t)));
        }
        let decision = self.dispatch(&event)?;
        self.last_seq = Some(event.seq);
        self.last_t = event.t;
        self.events.push(event);
        Ok(decision)
    }

    fn expected(&self) -> String {
        match self.next_activity() {
            Activity::StartSegment { segment } => format!("stage_started for {segment}"),
            Activity::CompleteSegment { segment } => format!("stage_completed for {segment}"),
            Activity::Questionnaire { instrument, timepoint, .. } => format!("{instrument} answer at {timepoint}"),
            Activity::Ride { stage, .. } => format!("end of ride {stage}"),
            Activity::SpanTrial { task, trial_index, .. } => format!("{} trial {trial_index}", task.as_str()),
            Activity::RtTrial { task, trial_index, .. } => format!("{} trial {trial_index}", task.as_str()),
            Activity::Finished => "nothing".to_owned(),
        }
    }

    fn unexpected(&self, kind: &EventKind) -> SessionError {
        invalid(format!("unexpected {}; expected {}", kind.name(), self.expected()))
    }

    fn dispatch(&mut self, event: &SessionEvent) -> Result<Decision, SessionError> {
        let seq = event.seq;
        let recorded = Decision::Recorded { seq };
        let segment = self.segment().expect("not finished");
        let next = self.next_activity();
        match (&event.kind, next) {
            (EventKind::StageStarted { segment: s }, Activity::StartSegment { segment: expected }) if *s == expected => {
                self.progress.started = true;
                self.progress.started_t = event.t;
                self.progress.phase = 0;
                Ok(recorded)
            }
            (EventKind::StageCompleted { segment: s }, Activity::Ride { .. }) if *s == segment => {
                let elapsed = event.t - self.progress.started_t;
                if elapsed < self.meta.ride_duration_ms {
                    return Err(invalid(format!(
                        "ride lasted {elapsed} ms, placeholder needs {} ms",
                        self.meta.ride_duration_ms
                    )));
                }
                self.finish_segment();
                Ok(recorded)
            }
            (EventKind::StageCompleted { segment: s }, Activity::CompleteSegment { segment: expected }) if *s == expected => {
                self.finish_segment();
                Ok(recorded)
            }
            (EventKind::QuestionnaireAnswer { timepoint, instrument, items }, Activity::Questionnaire { timepoint: et, instrument: ei, .. })
                if *timepoint == et && *instrument == ei =>
            {
                validate_items(*instrument, items).map_err(|e| invalid(e.to_string()))?;
                self.data.responses.push(QuestionnaireResponse {
                    participant: self.meta.participant.clone(),
                    instrument: *instrument,
                    timepoint: *timepoint,
                    items: items.clone(),
                });
                self.advance_phase();
                Ok(recorded)
            }
            (
                EventKind::SpanTrialResult { task, trial_index, stimulus, response },
                Activity::SpanTrial { stage, task: et, trial_index: ei, stimulus: expected, length, .. },
            ) if *task == et && *trial_index == ei => {
                if *stimulus != expected {
                    return Err(invalid(format!("{} trial {ei} stimulus does not match the one issued", et.as_str())));
                }
                let correct = recall_is_correct(stimulus, response);
                let mut state = self.span_state(et);
                let SpanDecision { finished, next_length } = state.advance(correct).map_err(|e| invalid(e.to_string()))?;
                self.data.trials.push(TrialRow::span(&self.meta.participant, stage, et, ei, length, correct));
                if finished {
                    self.span_scores.insert((stage, et), state.score().expect("finished"));
                    self.advance_phase();
                } else {
                    self.progress.span = Some(state);
                    self.progress.span_index += 1;
                }
                Ok(Decision::Span { seq, correct, finished, next_length })
            }
            (
                EventKind::RtTrialResult { task, trial_index, target, chosen, onset_ms, touch_ms, gaze_on_target_ms },
                Activity::RtTrial { stage, task: et, trial_index: ei, target: expected },
            ) if *task == et && *trial_index == ei => {
                if *target != expected {
                    return Err(invalid(format!("{} trial {ei} target {target} differs from issued {expected}", et.as_str())));
                }
                if *chosen >= CRT_TARGETS || (et == RtTaskKind::Srt && *chosen != 0) {
                    return Err(invalid(format!("chosen target {chosen} out of range")));
                }
                let mut trial = RtTrial::new(et, *target, *chosen, *onset_ms, *touch_ms);
                trial.gaze_on_target_ms = *gaze_on_target_ms;
                if trial.gaze_on_target_ms.is_none() && et == RtTaskKind::Crt {
                    let stream = self.gaze_stream(stage, &crt_episode(ei));
                    if !stream.is_empty() {
                        attach_gaze(&mut trial, &stream).map_err(|e| invalid(e.to_string()))?;
                    }
                }
                trial.check().map_err(|e| invalid(e.to_string()))?;
                self.data.trials.push(TrialRow::from_rt(&self.meta.participant, stage, ei, &trial));
                self.progress.rt_index += 1;
                if self.progress.rt_index as usize == et.trial_count() {
                    self.advance_phase();
                }
                Ok(Decision::Rt { seq, correct: trial.correct, reaction_time_ms: trial.reaction_time() })
            }
            (EventKind::GazeBatch { episode, samples }, _) => {
                let Segment::Assessment(stage) = segment else {
                    return Err(invalid("gaze batches belong to an assessment segment"));
                };
                if !self.progress.started {
                    return Err(invalid("gaze batch before stage_started"));
                }
                if episode != QUESTIONNAIRE_EPISODE && !episode.starts_with("crt-") {
                    return Err(invalid(format!("unknown gaze episode `{episode}`")));
                }
                let previous = self.gaze_stream(stage, episode).last().map(|s| s.t);
                let mut last = previous;
                for s in samples {
                    if last.is_some_and(|l| s.t < l) || s.t < 0 {
                        return Err(invalid(format!("gaze samples for `{episode}` are not in time order")));
                    }
                    if [s.pupil_left, s.pupil_right].iter().any(|p| p.value().is_some_and(|v| !(v > 0.0 && v.is_finite()))) {
                        return Err(invalid("pupil sizes must be positive"));
                    }
                    last = Some(s.t);
                }
                for s in samples {
                    self.data.gaze.push(GazeRow {
                        participant: self.meta.participant.clone(),
                        stage,
                        episode: episode.clone(),
                        sample: *s,
                    });
                }
                Ok(recorded)
            }
            (kind, _) => Err(self.unexpected(kind)),
        }
    }

    fn gaze_stream(&self, stage: Stage, episode: &str) -> Vec<GazeSample> {
        self.data
            .gaze
            .iter()
            .filter(|g| g.stage == stage && g.episode == episode)
            .map(|g| g.sample)
            .collect()
    }

    fn finish_segment(&mut self) {
        self.progress = Progress {
            segment: self.progress.segment + 1,
            started: false,
            started_t: 0,
            phase: 0,
            span: None,
            span_index: 0,
            rt_index: 0,
        };
    }

    /// Scores everything recorded so far.
    pub fn report(&self) -> SessionReport {
        let questionnaires = self
            .data
            .responses
            .iter()
            .map(|r| QuestionnaireScore {
                timepoint: r.timepoint,
                reports: score_all_variants(r.instrument, &r.items).expect("validated on entry"),
            })
            .collect();
        let stages = Stage::ALL
            .into_iter()
            .filter(|&s| self.data.responses.iter().any(|r| r.timepoint == s.into()))
            .map(|stage| self.stage_summary(stage))
            .collect();
        SessionReport {
            session: self.meta.id.clone(),
            participant: self.meta.participant.clone(),
            finished: self.is_finished(),
            events: self.events.len(),
            questionnaires,
            stages,
        }
    }

    fn stage_summary(&self, stage: Stage) -> StageSummary {
        let rt = |task: RtTaskKind| -> Vec<RtTrial> {
            self.data.trials.iter().filter(|t| t.stage == stage && t.task == task.into()).filter_map(TrialRow::to_rt).collect()
        };
        let csqvr_vr = self
            .data
            .responses
            .iter()
            .find(|r| r.timepoint == stage.into() && r.instrument == Instrument::CsqvrVr)
            .and_then(|r| score_all_variants(r.instrument, &r.items).ok())
            .and_then(|mut v| v.pop());
        let episode = self.gaze_stream(stage, QUESTIONNAIRE_EPISODE);
        StageSummary {
            stage,
            csqvr_vr,
            bdst: self.span_scores.get(&(stage, SpanTaskKind::Bdst)).copied(),
            bcbt: self.span_scores.get(&(stage, SpanTaskKind::Bcbt)).copied(),
            srt_mean: srt_summary(&rt(RtTaskKind::Srt)).ok(),
            crt: crt_summary(&rt(RtTaskKind::Crt)).ok(),
            pupil_mean: pupil_mean(&episode).ok(),
        }
    }
}

fn questionnaire_activity(timepoint: Timepoint, instrument: Instrument) -> Activity {
    let (min, max) = instrument.item_range();
    Activity::Questionnaire { timepoint, instrument, item_count: instrument.item_count(), min, max }
}
