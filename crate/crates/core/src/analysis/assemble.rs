//! Turns raw dataset rows into one [`AssessmentRecord`] per
//! (participant, stage).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{AssessmentRecord, GazeSample, Instrument, ParticipantId, QuestionnaireResponse, Stage, Timepoint};
use crate::io::{crt_episode, CohortDataset, TaskKind, TrialRow, QUESTIONNAIRE_EPISODE};
use crate::scoring::score_csqvr;
use crate::stats::pupil_mean;
use crate::tasks::rt::{attach_gaze, crt_summary, srt_summary};
use crate::tasks::{RtTrial, SpanTaskConfig, SpanTaskState};

/// A (participant, stage) cell that could not be assembled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellIssue {
    pub participant: ParticipantId,
    pub stage: Stage,
    pub reason: String,
}

/// Indexed view of a dataset.
pub struct DatasetIndex<'a> {
    pub responses: BTreeMap<(ParticipantId, Timepoint, Instrument), &'a QuestionnaireResponse>,
    trials: BTreeMap<(ParticipantId, Stage, TaskKind), Vec<&'a TrialRow>>,
    gaze: BTreeMap<(ParticipantId, Stage, String), Vec<GazeSample>>,
}

impl<'a> DatasetIndex<'a> {
    pub fn new(data: &'a CohortDataset) -> Self {
        let responses = data
            .responses
            .iter()
            .map(|r| ((r.participant.clone(), r.timepoint, r.instrument), r))
            .collect();
        let mut trials: BTreeMap<_, Vec<&TrialRow>> = BTreeMap::new();
        for t in &data.trials {
            trials.entry((t.participant.clone(), t.stage, t.task)).or_default().push(t);
        }
        for v in trials.values_mut() {
            v.sort_by_key(|t| t.trial_index);
        }
        let mut gaze: BTreeMap<_, Vec<GazeSample>> = BTreeMap::new();
        for g in &data.gaze {
            gaze.entry((g.participant.clone(), g.stage, g.episode.clone())).or_default().push(g.sample);
        }
        for v in gaze.values_mut() {
            v.sort_by_key(|s| s.t);
        }
        Self { responses, trials, gaze }
    }

    pub fn response(&self, p: &ParticipantId, t: Timepoint, i: Instrument) -> Option<&'a QuestionnaireResponse> {
        self.responses.get(&(p.clone(), t, i)).copied()
    }

    fn trials(&self, p: &ParticipantId, s: Stage, task: TaskKind) -> &[&'a TrialRow] {
        self.trials.get(&(p.clone(), s, task)).map_or(&[], Vec::as_slice)
    }

    fn gaze(&self, p: &ParticipantId, s: Stage, episode: &str) -> Option<&[GazeSample]> {
        self.gaze.get(&(p.clone(), s, episode.to_owned())).map(Vec::as_slice)
    }

    fn has_stage(&self, p: &ParticipantId, s: Stage) -> bool {
        self.response(p, s.into(), Instrument::CsqvrVr).is_some()
            || TaskKind::ALL.iter().any(|&k| !self.trials(p, s, k).is_empty())
    }
}

/// Replays span outcomes through the task engine, checking that each row's
/// length is the one the engine would have presented.
fn span_score(rows: &[&TrialRow], task: TaskKind) -> Result<u32, String> {
    let kind = task.span().expect("span task");
    let mut state = SpanTaskState::new(SpanTaskConfig::default_for(kind));
    for (i, row) in rows.iter().enumerate() {
        if row.trial_index as usize != i {
            return Err(format!("{task} trial indices are not contiguous from 0"));
        }
        if state.finished {
            return Err(format!("{task} has trials after the task finished"));
        }
        if row.length_or_target != state.current_length {
            return Err(format!(
                "{task} trial {i} has length {} but the engine presents {}",
                row.length_or_target, state.current_length
            ));
        }
        state.advance(row.correct).map_err(|e| e.to_string())?;
    }
    state.score().map_err(|e| format!("{task}: {e}"))
}

fn rt_trials(index: &DatasetIndex<'_>, p: &ParticipantId, s: Stage, task: TaskKind) -> Result<Vec<RtTrial>, String> {
    index
        .trials(p, s, task)
        .iter()
        .map(|row| {
            let mut t = row.to_rt().ok_or_else(|| format!("{task} trial {} lacks timing", row.trial_index))?;
            if t.gaze_on_target_ms.is_none() {
                if let Some(stream) = index.gaze(p, s, &crt_episode(row.trial_index)) {
                    attach_gaze(&mut t, stream).map_err(|e| e.to_string())?;
                }
            }
            Ok(t)
        })
        .collect()
}

fn assemble_cell(index: &DatasetIndex<'_>, p: &ParticipantId, stage: Stage) -> Result<AssessmentRecord, String> {
    let response = index
        .response(p, stage.into(), Instrument::CsqvrVr)
        .ok_or_else(|| "missing CSQVR_vr response".to_owned())?;
    let csqvr_vr = score_csqvr(Instrument::CsqvrVr, &response.items).map_err(|e| e.to_string())?;
    let bdst_score = span_score(index.trials(p, stage, TaskKind::Bdst), TaskKind::Bdst)?;
    let bcbt_score = span_score(index.trials(p, stage, TaskKind::Bcbt), TaskKind::Bcbt)?;
    let srt_mean = srt_summary(&rt_trials(index, p, stage, TaskKind::Srt)?).map_err(|e| format!("SRT: {e}"))?;
    let crt = crt_summary(&rt_trials(index, p, stage, TaskKind::Crt)?).map_err(|e| format!("CRT: {e}"))?;
    let pupil = index.gaze(p, stage, QUESTIONNAIRE_EPISODE).and_then(|s| pupil_mean(s).ok());
    Ok(AssessmentRecord {
        participant: p.clone(),
        stage,
        csqvr_vr,
        bdst_score,
        bcbt_score,
        srt_mean,
        crt_rt_mean: crt.rt_mean,
        crt_at_mean: crt.at_mean,
        crt_mt_mean: crt.mt_mean,
        pupil_mean: pupil,
    })
}

/// Builds every assessable cell. Cells with partial data are reported rather
/// than silently dropped.
pub fn assemble_records(data: &CohortDataset) -> (Vec<AssessmentRecord>, Vec<CellIssue>) {
    let index = DatasetIndex::new(data);
    let mut records = Vec::new();
    let mut issues = Vec::new();
    for p in data.participant_ids() {
        for stage in Stage::ALL {
            if !index.has_stage(&p, stage) {
                issues.push(CellIssue { participant: p.clone(), stage, reason: "no data for stage".to_owned() });
                continue;
            }
            match assemble_cell(&index, &p, stage) {
                Ok(r) => records.push(r),
                Err(reason) => issues.push(CellIssue { participant: p.clone(), stage, reason }),
            }
        }
    }
    (records, issues)
}
