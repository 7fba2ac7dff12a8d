//! Dataset files and ingest.

pub mod csv_io;
pub mod dataset;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use csv_io::{
    assessments_to_csv, gaze_to_csv, parse_assessments, participants_to_csv, responses_to_csv, trials_to_csv,
    write_dataset, RejectKind, Rejection, ASSESSMENTS_FILE, GAZE_FILE,
    PARTICIPANTS_FILE, RESPONSES_FILE, TRIALS_FILE,
};
pub use dataset::{crt_episode, CohortDataset, GazeRow, TaskKind, TrialRow, QUESTIONNAIRE_EPISODE};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{file}: {reason}")]
    Schema { file: String, reason: String },
    #[error("unrecognised input file {0} (expected responses/trials/gaze/participants .csv or a .json dataset)")]
    UnknownFile(PathBuf),
    #[error("{} row(s) rejected; first: {}", .0.len(), .0[0])]
    Rejected(Vec<Rejection>),
}

impl IngestError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        IngestError::Io { path: path.to_owned(), message: e.to_string() }
    }

    pub fn rejections(&self) -> &[Rejection] {
        match self {
            IngestError::Rejected(r) => r,
            _ => &[],
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, IngestError> {
    fs::read(path).map_err(|e| IngestError::io(path, e))
}

/// Reads and validates the given files. A directory expands to the standard
/// table files inside it. Any invalid row fails the whole ingest and every
/// rejection is reported.
pub fn ingest<P: AsRef<Path>>(paths: &[P]) -> Result<CohortDataset, IngestError> {
    let mut files = Vec::new();
    for p in paths {
        let p = p.as_ref();
        if p.is_dir() {
            for name in [PARTICIPANTS_FILE, RESPONSES_FILE, TRIALS_FILE, GAZE_FILE] {
                let f = p.join(name);
                if f.exists() {
                    files.push(f);
                }
            }
        } else {
            files.push(p.to_owned());
        }
    }
    let mut data = CohortDataset::default();
    let mut rejects = Vec::new();
    for f in &files {
        let name = f.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        match name {
            RESPONSES_FILE => data.responses.extend(csv_io::parse_responses(&read(f)?, &mut rejects)?),
            TRIALS_FILE => data.trials.extend(csv_io::parse_trials(&read(f)?, &mut rejects)?),
            GAZE_FILE => data.gaze.extend(csv_io::parse_gaze(&read(f)?, &mut rejects)?),
            PARTICIPANTS_FILE => data.participants.extend(csv_io::parse_participants(&read(f)?, &mut rejects)?),
            _ if name.ends_with(".json") => {
                let d: CohortDataset = serde_json::from_slice(&read(f)?)
                    .map_err(|e| IngestError::Schema { file: name.to_owned(), reason: e.to_string() })?;
                data.merge(d);
            }
            _ => return Err(IngestError::UnknownFile(f.clone())),
        }
    }
    finish(data, rejects)
}

fn finish(data: CohortDataset, mut rejects: Vec<Rejection>) -> Result<CohortDataset, IngestError> {
    if rejects.is_empty() {
        return Ok(data);
    }
    // grouped by file, then in line order
    rejects.sort_by(|a, b| a.file.cmp(&b.file).then(a.line.cmp(&b.line)));
    Err(IngestError::Rejected(rejects))
}

/// Parses in-memory table contents, keyed by file name. Used by tests and the
/// session exporter.
pub fn ingest_bytes(files: &[(&str, &[u8])]) -> Result<CohortDataset, IngestError> {
    let mut data = CohortDataset::default();
    let mut rejects = Vec::new();
    for &(name, bytes) in files {
        match name {
            RESPONSES_FILE => data.responses.extend(csv_io::parse_responses(bytes, &mut rejects)?),
            TRIALS_FILE => data.trials.extend(csv_io::parse_trials(bytes, &mut rejects)?),
            GAZE_FILE => data.gaze.extend(csv_io::parse_gaze(bytes, &mut rejects)?),
            PARTICIPANTS_FILE => data.participants.extend(csv_io::parse_participants(bytes, &mut rejects)?),
            other => return Err(IngestError::UnknownFile(other.into())),
        }
    }
    finish(data, rejects)
}
