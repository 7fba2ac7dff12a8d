//! Simple and choice reaction time (Deary–Liewald), with eye-tracking
//! decomposition of choice reaction time into attentional and motor time.

use serde::{Deserialize, Serialize};

use super::TaskError;
use crate::domain::GazeSample;

pub const SRT_TRIALS: usize = 20;
pub const CRT_TRIALS: usize = 40;
pub const CRT_TARGETS: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RtTaskKind {
    #[serde(rename = "SRT")]
    Srt,
    #[serde(rename = "CRT")]
    Crt,
}

impl RtTaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RtTaskKind::Srt => "SRT",
            RtTaskKind::Crt => "CRT",
        }
    }

    pub fn trial_count(self) -> usize {
        match self {
            RtTaskKind::Srt => SRT_TRIALS,
            RtTaskKind::Crt => CRT_TRIALS,
        }
    }
}

/// One scored reaction-time trial. Times are trial-local milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RtTrial {
    pub task: RtTaskKind,
    /// Lit target (always 0 for SRT).
    pub target: u8,
    /// First touch landed on the lit target.
    pub correct: bool,
    pub onset_ms: i64,
    pub touch_ms: i64,
    pub gaze_on_target_ms: Option<i64>,
}

impl RtTrial {
    pub fn new(task: RtTaskKind, target: u8, chosen: u8, onset_ms: i64, touch_ms: i64) -> Self {
        Self { task, target, correct: chosen == target, onset_ms, touch_ms, gaze_on_target_ms: None }
    }

    pub fn reaction_time(&self) -> i64 {
        self.touch_ms - self.onset_ms
    }

    /// Onset to first gaze on the target.
    pub fn attentional_time(&self) -> Option<i64> {
        self.gaze_on_target_ms.map(|g| g - self.onset_ms)
    }

    /// First gaze on the target to touch.
    pub fn motor_time(&self) -> Option<i64> {
        self.gaze_on_target_ms.map(|g| self.touch_ms - g)
    }

    pub fn check(&self) -> Result<(), TaskError> {
        let ordered = self.touch_ms >= self.onset_ms
            && self
                .gaze_on_target_ms
                .is_none_or(|g| self.onset_ms <= g && g <= self.touch_ms);
        if ordered {
            Ok(())
        } else {
            Err(TaskError::InvalidTrialTiming {
                onset_ms: self.onset_ms,
                touch_ms: self.touch_ms,
                gaze_ms: self.gaze_on_target_ms,
            })
        }
    }
}

/// Time of the first on-target gaze sample at or after `onset_ms`.
pub fn first_gaze_on_target(stream: &[GazeSample], onset_ms: i64) -> Result<Option<i64>, TaskError> {
    if stream.windows(2).any(|w| w[1].t < w[0].t) {
        return Err(TaskError::UnsortedStream);
    }
    Ok(stream.iter().find(|s| s.gaze_target_hit && s.t >= onset_ms).map(|s| s.t))
}

/// Fills each trial's `gaze_on_target_ms` from its gaze stream. The result is
/// clamped to the touch: gaze arriving after the touch means the target was
/// never attended before the response, which leaves the decomposition
/// undefined for that trial.
pub fn attach_gaze(trial: &mut RtTrial, stream: &[GazeSample]) -> Result<(), TaskError> {
    trial.gaze_on_target_ms = first_gaze_on_target(stream, trial.onset_ms)?.filter(|&g| g <= trial.touch_ms);
    Ok(())
}

fn check_count(trials: &[RtTrial], task: RtTaskKind) -> Result<(), TaskError> {
    let expected = task.trial_count();
    if trials.len() != expected {
        return Err(TaskError::WrongTrialCount { expected, actual: trials.len() });
    }
    if let Some(t) = trials.iter().find(|t| t.task != task) {
        return Err(TaskError::WrongTaskKind { expected: task, actual: t.task });
    }
    trials.iter().try_for_each(RtTrial::check)
}

/// Mean reaction time over the 20 simple reaction trials.
pub fn srt_summary(trials: &[RtTrial]) -> Result<f64, TaskError> {
    check_count(trials, RtTaskKind::Srt)?;
    Ok(trials.iter().map(|t| t.reaction_time() as f64).sum::<f64>() / trials.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrtSummary {
    pub rt_mean: f64,
    /// Over correct trials that carry gaze; absent when none do.
    pub at_mean: Option<f64>,
    pub mt_mean: Option<f64>,
    pub n_correct: u32,
    /// Correct trials contributing to the attentional/motor means.
    pub n_with_gaze: u32,
}

/// Means over correct trials only. Correct trials without an on-target gaze
/// sample still count toward `rt_mean` but not toward `at_mean`/`mt_mean`.
pub fn crt_summary(trials: &[RtTrial]) -> Result<CrtSummary, TaskError> {
    check_count(trials, RtTaskKind::Crt)?;
    let correct: Vec<&RtTrial> = trials.iter().filter(|t| t.correct).collect();
    if correct.is_empty() {
        return Err(TaskError::NoCorrectTrials);
    }
    let rt_sum: i64 = correct.iter().map(|t| t.reaction_time()).sum();
    let (mut at_sum, mut mt_sum, mut n_gaze) = (0i64, 0i64, 0u32);
    for t in &correct {
        if let (Some(at), Some(mt)) = (t.attentional_time(), t.motor_time()) {
            at_sum += at;
            mt_sum += mt;
            n_gaze += 1;
        }
    }
    let mean = |sum: i64, n: u32| (n > 0).then(|| sum as f64 / f64::from(n));
    Ok(CrtSummary {
        rt_mean: rt_sum as f64 / correct.len() as f64,
        at_mean: mean(at_sum, n_gaze),
        mt_mean: mean(mt_sum, n_gaze),
        n_correct: correct.len() as u32,
        n_with_gaze: n_gaze,
    })
}
