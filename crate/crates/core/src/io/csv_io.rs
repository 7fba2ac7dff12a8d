//! Bit-exact CSV schemas. UTF-8, comma separated, header row required, empty
//! cell means missing.
//!
//! * `responses.csv`: participant, stage, instrument, item_1..item_N
//! * `trials.csv`: participant, stage, task, trial_index, length_or_target,
//!   correct, onset_ms, touch_ms, gaze_on_target_ms
//! * `gaze.csv`: participant, stage, episode, t_ms, hit, pupil_l, pupil_r
//!
//! `participants.csv` and `assessments.csv` are auxiliary tables in the same
//! style.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use csv::StringRecord;
use serde::{Deserialize, Serialize};

use super::dataset::{CohortDataset, GazeRow, TaskKind, TrialRow};
use super::IngestError;
use crate::domain::{
    items_from_reals, AssessmentRecord, DominantEye, Instrument, ParticipantId,
    ParticipantRecord, Pupil, QuestionnaireResponse, ScoreReport, ScoreVariant, Sex, Stage,
    Timepoint,
};
use crate::scoring::{CSQVR_NAUSEA, CSQVR_OCULOMOTOR, CSQVR_VESTIBULAR};
use crate::tasks::span::MAX_SPAN_LENGTH;

pub const RESPONSES_FILE: &str = "responses.csv";
pub const TRIALS_FILE: &str = "trials.csv";
pub const GAZE_FILE: &str = "gaze.csv";
pub const PARTICIPANTS_FILE: &str = "participants.csv";
pub const ASSESSMENTS_FILE: &str = "assessments.csv";

/// Widest instrument (MSSQ).
pub const MAX_ITEMS: usize = 18;

pub const TRIALS_HEADER: [&str; 9] = [
    "participant",
    "stage",
    "task",
    "trial_index",
    "length_or_target",
    "correct",
    "onset_ms",
    "touch_ms",
    "gaze_on_target_ms",
];
pub const GAZE_HEADER: [&str; 7] = ["participant", "stage", "episode", "t_ms", "hit", "pupil_l", "pupil_r"];
pub const PARTICIPANTS_HEADER: [&str; 9] = [
    "id",
    "age",
    "sex",
    "education",
    "experience_vr",
    "experience_computing",
    "experience_gaming",
    "mssq_total",
    "dominant_eye",
];
pub const ASSESSMENTS_HEADER: [&str; 13] = [
    "participant",
    "stage",
    "csqvr_nausea",
    "csqvr_vestibular",
    "csqvr_oculomotor",
    "csqvr_total",
    "bdst",
    "bcbt",
    "srt_mean",
    "crt_rt_mean",
    "crt_at_mean",
    "crt_mt_mean",
    "pupil_mean",
];

pub fn responses_header() -> Vec<String> {
    ["participant", "stage", "instrument"]
        .into_iter()
        .map(str::to_owned)
        .chain((1..=MAX_ITEMS).map(|i| format!("item_{i}")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectKind {
    Schema,
    DuplicateKey,
    Range,
}

/// A row that failed validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub file: String,
    pub line: u64,
    pub kind: RejectKind,
    pub reason: String,
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {:?}: {}", self.file, self.line, self.kind, self.reason)
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn pupil_cell(p: Pupil) -> String {
    opt(p.value())
}

fn to_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().flexible(false).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn owned(h: &[&str]) -> Vec<String> {
    h.iter().map(|s| (*s).to_owned()).collect()
}

pub fn responses_to_csv(responses: &[QuestionnaireResponse]) -> Vec<u8> {
    to_bytes(
        &responses_header(),
        responses.iter().map(|r| {
            let mut row = vec![r.participant.to_string(), r.timepoint.to_string(), r.instrument.to_string()];
            row.extend(r.items.iter().map(u8::to_string));
            row.resize(3 + MAX_ITEMS, String::new());
            row
        }),
    )
}

pub fn trials_to_csv(trials: &[TrialRow]) -> Vec<u8> {
    to_bytes(
        &owned(&TRIALS_HEADER),
        trials.iter().map(|t| {
            vec![
                t.participant.to_string(),
                t.stage.to_string(),
                t.task.to_string(),
                t.trial_index.to_string(),
                t.length_or_target.to_string(),
                flag(t.correct).to_owned(),
                opt(t.onset_ms),
                opt(t.touch_ms),
                opt(t.gaze_on_target_ms),
            ]
        }),
    )
}

pub fn gaze_to_csv(gaze: &[GazeRow]) -> Vec<u8> {
    to_bytes(
        &owned(&GAZE_HEADER),
        gaze.iter().map(|g| {
            vec![
                g.participant.to_string(),
                g.stage.to_string(),
                g.episode.clone(),
                g.sample.t.to_string(),
                flag(g.sample.gaze_target_hit).to_owned(),
                pupil_cell(g.sample.pupil_left),
                pupil_cell(g.sample.pupil_right),
            ]
        }),
    )
}

fn sex_str(s: Sex) -> &'static str {
    match s {
        Sex::Female => "female",
        Sex::Male => "male",
        Sex::Other => "other",
        Sex::Unknown => "unknown",
    }
}

fn eye_str(e: DominantEye) -> &'static str {
    match e {
        DominantEye::Left => "left",
        DominantEye::Right => "right",
        DominantEye::Unknown => "unknown",
    }
}

pub fn participants_to_csv(participants: &[ParticipantRecord]) -> Vec<u8> {
    to_bytes(
        &owned(&PARTICIPANTS_HEADER),
        participants.iter().map(|p| {
            vec![
                p.id.to_string(),
                p.age.to_string(),
                sex_str(p.sex).to_owned(),
                p.education.to_string(),
                p.experience_vr.to_string(),
                p.experience_computing.to_string(),
                p.experience_gaming.to_string(),
                p.mssq_total.to_string(),
                eye_str(p.dominant_eye).to_owned(),
            ]
        }),
    )
}

pub fn assessments_to_csv(records: &[AssessmentRecord]) -> Vec<u8> {
    to_bytes(
        &owned(&ASSESSMENTS_HEADER),
        records.iter().map(|r| {
            let sub = |n: &str| opt(r.csqvr_vr.subscale(n));
            vec![
                r.participant.to_string(),
                r.stage.to_string(),
                sub(CSQVR_NAUSEA),
                sub(CSQVR_VESTIBULAR),
                sub(CSQVR_OCULOMOTOR),
                r.csqvr_vr.total.to_string(),
                r.bdst_score.to_string(),
                r.bcbt_score.to_string(),
                r.srt_mean.to_string(),
                r.crt_rt_mean.to_string(),
                opt(r.crt_at_mean),
                opt(r.crt_mt_mean),
                opt(r.pupil_mean),
            ]
        }),
    )
}

/// Writes every non-empty table of the dataset into `dir`.
pub fn write_dataset(dir: &Path, data: &CohortDataset) -> Result<(), IngestError> {
    fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
    let mut files = vec![
        (RESPONSES_FILE, responses_to_csv(&data.responses)),
        (TRIALS_FILE, trials_to_csv(&data.trials)),
        (GAZE_FILE, gaze_to_csv(&data.gaze)),
    ];
    if !data.participants.is_empty() {
        files.push((PARTICIPANTS_FILE, participants_to_csv(&data.participants)));
    }
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| IngestError::io(&path, e))?;
    }
    Ok(())
}

/// One data row with its source line for error reporting.
struct Row<'t> {
    columns: &'t BTreeMap<String, usize>,
    record: StringRecord,
    line: u64,
}

type CellResult<T> = Result<T, (RejectKind, String)>;

impl Row<'_> {
    fn raw(&self, col: &str) -> &str {
        self.columns.get(col).and_then(|&i| self.record.get(i)).unwrap_or("").trim()
    }

    fn req<T: FromStr>(&self, col: &str) -> CellResult<T>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.raw(col);
        if s.is_empty() {
            return Err((RejectKind::Schema, format!("missing value for `{col}`")));
        }
        s.parse::<T>().map_err(|e| (RejectKind::Schema, format!("bad `{col}` value `{s}`: {e}")))
    }

    fn opt<T: FromStr>(&self, col: &str) -> CellResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if self.raw(col).is_empty() {
            Ok(None)
        } else {
            self.req(col).map(Some)
        }
    }

    fn bool(&self, col: &str) -> CellResult<bool> {
        match self.raw(col).to_ascii_lowercase().as_str() {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            "" => Err((RejectKind::Schema, format!("missing value for `{col}`"))),
            other => Err((RejectKind::Schema, format!("bad `{col}` value `{other}`"))),
        }
    }
}

fn read_table<T>(
    file: &str,
    bytes: &[u8],
    required: &[&str],
    mut parse: impl FnMut(&Row<'_>) -> CellResult<T>,
) -> Result<(Vec<(u64, T)>, Vec<Rejection>), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).has_headers(true).from_reader(bytes);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Schema { file: file.to_owned(), reason: e.to_string() })?
        .clone();
    let columns: BTreeMap<String, usize> =
        headers.iter().enumerate().map(|(i, h)| (h.trim().to_owned(), i)).collect();
    if let Some(missing) = required.iter().find(|c| !columns.contains_key(**c)) {
        return Err(IngestError::Schema { file: file.to_owned(), reason: format!("missing column `{missing}`") });
    }
    let mut rejects = Vec::new();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let record = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                rejects.push(Rejection { file: file.to_owned(), line, kind: RejectKind::Schema, reason: e.to_string() });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let row = Row { columns: &columns, record, line };
        match parse(&row) {
            Ok(v) => out.push((line, v)),
            Err((kind, reason)) => {
                let line = row.line;
                rejects.push(Rejection { file: file.to_owned(), line, kind, reason });
            }
        }
    }
    Ok((out, rejects))
}

fn reject(file: &str, line: u64, kind: RejectKind, reason: String) -> Rejection {
    Rejection { file: file.to_owned(), line, kind, reason }
}

/// Drops rows whose key repeats an earlier row, recording a rejection.
fn dedup<T, K: std::hash::Hash + Eq>(
    file: &str,
    rows: Vec<(u64, T)>,
    key: impl Fn(&T) -> K,
    describe: impl Fn(&T) -> String,
    rejects: &mut Vec<Rejection>,
) -> Vec<T> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        if seen.insert(key(&row)) {
            out.push(row);
        } else {
            rejects.push(reject(file, line, RejectKind::DuplicateKey, format!("duplicate key {}", describe(&row))));
        }
    }
    out
}

pub fn parse_responses(bytes: &[u8], rejects: &mut Vec<Rejection>) -> Result<Vec<QuestionnaireResponse>, IngestError> {
    let (rows, mut rej) = read_table(RESPONSES_FILE, bytes, &["participant", "stage", "instrument", "item_1"], |row| {
        let participant = ParticipantId(row.req::<String>("participant")?);
        let timepoint: Timepoint = row.req("stage")?;
        let instrument: Instrument = row.req("instrument")?;
        let mut values = Vec::new();
        for i in 1..=MAX_ITEMS {
            match row.opt::<f64>(&format!("item_{i}"))? {
                Some(v) => values.push(v),
                None => break,
            }
        }
        let trailing = ((values.len() + 1)..=MAX_ITEMS).find(|i| !row.raw(&format!("item_{i}")).is_empty());
        if let Some(i) = trailing {
            return Err((RejectKind::Schema, format!("item_{i} present after an empty item column")));
        }
        let items = items_from_reals(instrument, &values).map_err(|e| {
            let kind = match e {
                crate::domain::ValidationError::WrongItemCount { .. } => RejectKind::Schema,
                _ => RejectKind::Range,
            };
            (kind, e.to_string())
        })?;
        Ok(QuestionnaireResponse { participant, instrument, timepoint, items })
    })?;
    let out = dedup(
        RESPONSES_FILE,
        rows,
        |r| (r.participant.clone(), r.timepoint, r.instrument),
        |r| format!("({}, {}, {})", r.participant, r.timepoint, r.instrument),
        &mut rej,
    );
    rejects.extend(rej);
    Ok(out)
}

pub fn parse_trials(bytes: &[u8], rejects: &mut Vec<Rejection>) -> Result<Vec<TrialRow>, IngestError> {
    let (rows, mut rej) = read_table(TRIALS_FILE, bytes, &TRIALS_HEADER, |row| {
        let t = TrialRow {
            participant: ParticipantId(row.req::<String>("participant")?),
            stage: row.req("stage")?,
            task: row.req("task")?,
            trial_index: row.req("trial_index")?,
            length_or_target: row.req("length_or_target")?,
            correct: row.bool("correct")?,
            onset_ms: row.opt("onset_ms")?,
            touch_ms: row.opt("touch_ms")?,
            gaze_on_target_ms: row.opt("gaze_on_target_ms")?,
        };
        match t.task {
            TaskKind::Bdst | TaskKind::Bcbt => {
                if !(2..=MAX_SPAN_LENGTH).contains(&t.length_or_target) {
                    return Err((RejectKind::Range, format!("span length {} outside 2..=7", t.length_or_target)));
                }
            }
            TaskKind::Srt | TaskKind::Crt => {
                let rt = t.to_rt().ok_or((RejectKind::Schema, "reaction trial needs onset_ms and touch_ms".to_owned()))?;
                if t.task == TaskKind::Crt && t.length_or_target >= crate::tasks::rt::CRT_TARGETS {
                    return Err((RejectKind::Range, format!("CRT target {} outside 0..4", t.length_or_target)));
                }
                if rt.onset_ms < 0 {
                    return Err((RejectKind::Range, "negative onset_ms".to_owned()));
                }
                rt.check().map_err(|e| (RejectKind::Range, e.to_string()))?;
            }
        }
        Ok(t)
    })?;
    let out = dedup(
        TRIALS_FILE,
        rows,
        |t| (t.participant.clone(), t.stage, t.task, t.trial_index),
        |t| format!("({}, {}, {}, {})", t.participant, t.stage, t.task, t.trial_index),
        &mut rej,
    );
    rejects.extend(rej);
    Ok(out)
}

pub fn parse_gaze(bytes: &[u8], rejects: &mut Vec<Rejection>) -> Result<Vec<GazeRow>, IngestError> {
    let (rows, rej) = read_table(GAZE_FILE, bytes, &GAZE_HEADER, |row| {
        let pupil = |col: &str| -> CellResult<Pupil> {
            match row.opt::<f64>(col)? {
                None => Ok(Pupil::Invalid),
                Some(v) if v > 0.0 && v.is_finite() => Ok(Pupil::Valid(v)),
                Some(v) => Err((RejectKind::Range, format!("`{col}` must be positive or empty, got {v}"))),
            }
        };
        let t: i64 = row.req("t_ms")?;
        if t < 0 {
            return Err((RejectKind::Range, "negative t_ms".to_owned()));
        }
        Ok(GazeRow::new(
            &ParticipantId(row.req::<String>("participant")?),
            row.req("stage")?,
            &row.req::<String>("episode")?,
            t,
            row.bool("hit")?,
            pupil("pupil_l")?,
            pupil("pupil_r")?,
        ))
    })?;
    rejects.extend(rej);
    Ok(rows.into_iter().map(|(_, g)| g).collect())
}

fn parse_sex(s: &str) -> Result<Sex, String> {
    match s.to_ascii_lowercase().as_str() {
        "female" | "f" => Ok(Sex::Female),
        "male" | "m" => Ok(Sex::Male),
        "other" => Ok(Sex::Other),
        "unknown" | "" => Ok(Sex::Unknown),
        other => Err(format!("unknown sex `{other}`")),
    }
}

fn parse_eye(s: &str) -> Result<DominantEye, String> {
    match s.to_ascii_lowercase().as_str() {
        "left" => Ok(DominantEye::Left),
        "right" => Ok(DominantEye::Right),
        "unknown" | "" => Ok(DominantEye::Unknown),
        other => Err(format!("unknown dominant eye `{other}`")),
    }
}

pub fn parse_participants(bytes: &[u8], rejects: &mut Vec<Rejection>) -> Result<Vec<ParticipantRecord>, IngestError> {
    let (rows, mut rej) = read_table(PARTICIPANTS_FILE, bytes, &PARTICIPANTS_HEADER, |row| {
        let experience = |col: &str| -> CellResult<u8> {
            let v: u8 = row.req(col)?;
            if (2..=12).contains(&v) {
                Ok(v)
            } else {
                Err((RejectKind::Range, format!("`{col}` {v} outside 2..=12")))
            }
        };
        let mssq_total: f64 = row.req("mssq_total")?;
        if !(0.0..=54.0).contains(&mssq_total) {
            return Err((RejectKind::Range, format!("mssq_total {mssq_total} outside 0..=54")));
        }
        Ok(ParticipantRecord {
            id: ParticipantId(row.req::<String>("id")?),
            age: row.req("age")?,
            sex: parse_sex(row.raw("sex")).map_err(|e| (RejectKind::Schema, e))?,
            education: row.req("education")?,
            experience_vr: experience("experience_vr")?,
            experience_computing: experience("experience_computing")?,
            experience_gaming: experience("experience_gaming")?,
            mssq_total,
            dominant_eye: parse_eye(row.raw("dominant_eye")).map_err(|e| (RejectKind::Schema, e))?,
        })
    })?;
    let out = dedup(PARTICIPANTS_FILE, rows, |p| p.id.clone(), |p| format!("({})", p.id), &mut rej);
    rejects.extend(rej);
    Ok(out)
}

pub fn parse_assessments(bytes: &[u8], rejects: &mut Vec<Rejection>) -> Result<Vec<AssessmentRecord>, IngestError> {
    let (rows, rej) = read_table(ASSESSMENTS_FILE, bytes, &ASSESSMENTS_HEADER, |row| {
        let subscales = BTreeMap::from([
            (CSQVR_NAUSEA.to_owned(), row.req::<f64>("csqvr_nausea")?),
            (CSQVR_VESTIBULAR.to_owned(), row.req::<f64>("csqvr_vestibular")?),
            (CSQVR_OCULOMOTOR.to_owned(), row.req::<f64>("csqvr_oculomotor")?),
        ]);
        let total: f64 = row.req("csqvr_total")?;
        if total != subscales.values().sum::<f64>() {
            return Err((RejectKind::Range, "csqvr_total differs from the sum of its sub-scales".to_owned()));
        }
        Ok(AssessmentRecord {
            participant: ParticipantId(row.req::<String>("participant")?),
            stage: row.req::<Stage>("stage")?,
            csqvr_vr: ScoreReport {
                instrument: Instrument::CsqvrVr,
                variant: ScoreVariant::Standard,
                total,
                subscales,
                max_total: 42.0,
                max_subscale: 14.0,
            },
            bdst_score: row.req("bdst")?,
            bcbt_score: row.req("bcbt")?,
            srt_mean: row.req("srt_mean")?,
            crt_rt_mean: row.req("crt_rt_mean")?,
            crt_at_mean: row.opt("crt_at_mean")?,
            crt_mt_mean: row.opt("crt_mt_mean")?,
            pupil_mean: row.opt("pupil_mean")?,
        })
    })?;
    rejects.extend(rej);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}
