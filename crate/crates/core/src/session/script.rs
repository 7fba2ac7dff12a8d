//! A headless participant that answers whatever the protocol asks next.
//! Drives integration tests and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Activity, EventKind, SessionEvent};
use crate::domain::{GazeSample, Pupil};
use crate::io::{crt_episode, QUESTIONNAIRE_EPISODE};
use crate::tasks::rt::CRT_TARGETS;
use crate::tasks::RtTaskKind;

pub struct ScriptedParticipant {
    rng: ChaCha8Rng,
    seq: u64,
    t: i64,
    /// Span length up to which recall is always correct.
    pub span_ability: u8,
}

impl ScriptedParticipant {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), seq: 0, t: 0, span_ability: 5 }
    }

    /// Starts numbering after an existing log position.
    pub fn resume(seed: u64, last_seq: u64, last_t: i64) -> Self {
        Self { seq: last_seq, t: last_t, ..Self::new(seed) }
    }

    fn event(&mut self, advance_ms: i64, kind: EventKind) -> SessionEvent {
        self.seq += 1;
        self.t += advance_ms;
        SessionEvent { session: String::new(), seq: self.seq, t: self.t, kind }
    }

    fn gaze(&mut self, from: i64, n: usize, hit_from: Option<i64>) -> Vec<GazeSample> {
        (0..n)
            .map(|k| {
                let t = from + (k as i64 * 25) / 3;
                let pupil = if self.rng.random_bool(0.03) { Pupil::Invalid } else { Pupil::Valid(self.rng.random_range(3.5..4.5)) };
                GazeSample {
                    t,
                    gaze_target_hit: hit_from.is_some_and(|h| t >= h),
                    pupil_left: pupil,
                    pupil_right: Pupil::Valid(self.rng.random_range(3.5..4.5)),
                }
            })
            .collect()
    }

    /// Events answering `activity`; empty once the session is finished.
    pub fn respond(&mut self, activity: &Activity) -> Vec<SessionEvent> {
        match activity {
            Activity::Finished => vec![],
            Activity::StartSegment { segment } => vec![self.event(1_000, EventKind::StageStarted { segment: *segment })],
            Activity::CompleteSegment { segment } => {
                vec![self.event(500, EventKind::StageCompleted { segment: *segment })]
            }
            Activity::Ride { stage, duration_ms, .. } => {
                let segment = super::Segment::Ride(*stage);
                vec![self.event(*duration_ms, EventKind::StageCompleted { segment })]
            }
            Activity::Questionnaire { timepoint, instrument, item_count, min, max } => {
                let mut out = Vec::new();
                if timepoint.stage().is_some() {
                    let samples = self.gaze(0, 240, None);
                    out.push(self.event(100, EventKind::GazeBatch { episode: QUESTIONNAIRE_EPISODE.to_owned(), samples }));
                }
                let items = (0..*item_count).map(|_| self.rng.random_range(*min..=*max)).collect();
                out.push(self.event(20_000, EventKind::QuestionnaireAnswer { timepoint: *timepoint, instrument: *instrument, items }));
                out
            }
            Activity::SpanTrial { task, trial_index, length, stimulus, .. } => {
                let mut response: Vec<u8> = stimulus.iter().rev().copied().collect();
                let lapse = *length > self.span_ability || self.rng.random_bool(0.1);
                if lapse {
                    response.swap(0, 1);
                }
                vec![self.event(
                    4_000,
                    EventKind::SpanTrialResult { task: *task, trial_index: *trial_index, stimulus: stimulus.clone(), response },
                )]
            }
            Activity::RtTrial { task, trial_index, target, .. } => {
                let onset = self.rng.random_range(1_000..3_000);
                let at = self.rng.random_range(180..400);
                let mt = self.rng.random_range(120..300);
                let chosen = if *task == RtTaskKind::Crt && self.rng.random_bool(0.05) {
                    (target + 1) % CRT_TARGETS
                } else {
                    *target
                };
                let mut out = Vec::new();
                // half the CRT trials report gaze as a stream, half inline
                let stream = *task == RtTaskKind::Crt && self.rng.random_bool(0.5);
                if stream {
                    let samples = self.gaze(onset - 50, 100, Some(onset + at));
                    out.push(self.event(10, EventKind::GazeBatch { episode: crt_episode(*trial_index), samples }));
                }
                let gaze_on_target_ms = (*task == RtTaskKind::Crt && !stream).then_some(onset + at);
                out.push(self.event(
                    onset + at + mt,
                    EventKind::RtTrialResult {
                        task: *task,
                        trial_index: *trial_index,
                        target: *target,
                        chosen,
                        onset_ms: onset,
                        touch_ms: onset + at + mt,
                        gaze_on_target_ms,
                    },
                ));
                out
            }
        }
    }
}
