//! Batch validation pipeline over a cohort dataset.
//!
//! Every analysis is isolated: a failing section is reported as
//! `not_computable` with its reason and the rest of the report still runs.

pub mod assemble;
pub mod tables;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use assemble::{assemble_records, CellIssue, DatasetIndex};

use crate::domain::{AssessmentRecord, Instrument, Metric, ParticipantId, ScoreReport, Stage, Timepoint};
use crate::io::{ingest, CohortDataset, IngestError};
use crate::psychometrics::{
    decline_criterion, flag_declines, optimal_cutoff, pearson, reliability_report, Correlation, DeclineCriterion,
    DeclineFlag, ReliabilityRow, ReliabilityScheme, RocResult,
};
use crate::scoring::{
    score_items, CSQVR_NAUSEA, CSQVR_OCULOMOTOR, CSQVR_VESTIBULAR, SSQ_DISORIENTATION, SSQ_NAUSEA,
    SSQ_OCULOMOTOR, VRSQ_DISORIENTATION, VRSQ_OCULOMOTOR,
};
use crate::stats::{fit_random_intercept, orq_normalize, LmmMethod, MixedModelFit, PlottingPosition};

pub const TOTAL: &str = "total";

/// Result of one isolated analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok { value: T },
    NotComputable { reason: String },
}

impl<T> Outcome<T> {
    pub fn from_result<E: std::fmt::Display>(r: Result<T, E>) -> Self {
        match r {
            Ok(value) => Outcome::Ok { value },
            Err(e) => Outcome::NotComputable { reason: e.to_string() },
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Outcome::Ok { value } => Some(value),
            Outcome::NotComputable { .. } => None,
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Outcome::Ok { .. } => None,
            Outcome::NotComputable { reason } => Some(reason),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Outcome::Ok { .. })
    }
}

/// How ROC observations pair questionnaire scores with decline labels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RocPairing {
    /// One observation per (participant, ride). Pre/post instruments repeat
    /// the post-exposure score for each ride.
    #[default]
    Observation,
    /// One observation per participant, positive if any ride declined. The
    /// in-VR questionnaire contributes its highest ride score.
    Participant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Seed recorded in provenance when the data came from the simulator.
    pub seed: Option<u64>,
    /// Ordered-quantile transform before correlations.
    pub transform_correlations: bool,
    /// Ordered-quantile transform of both LMM variables.
    pub transform_lmm: bool,
    pub plotting_position: PlottingPosition,
    pub lmm_method: LmmMethod,
    pub roc_pairing: RocPairing,
    pub decline_metrics: Vec<Metric>,
    pub roc_targets: Vec<Metric>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            seed: None,
            transform_correlations: true,
            transform_lmm: true,
            plotting_position: PlottingPosition::default(),
            lmm_method: LmmMethod::Ml,
            roc_pairing: RocPairing::Observation,
            decline_metrics: Metric::ALL.to_vec(),
            roc_targets: vec![Metric::CrtRt, Metric::CrtMt],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

impl InputDigest {
    pub fn of(name: &str, bytes: &[u8]) -> Self {
        Self { name: name.to_owned(), sha256: hex::encode(Sha256::digest(bytes)), bytes: bytes.len() as u64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub software: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: AnalysisConfig,
    pub inputs: Vec<InputDigest>,
    /// Filled by the caller; the analysis itself never reads the clock.
    pub generated_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMeans {
    pub stage: Stage,
    pub n: usize,
    pub csqvr_total: f64,
    pub crt_rt: f64,
    pub pupil: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilitySection {
    pub instrument: Instrument,
    pub timepoints: String,
    pub outcome: Outcome<Vec<ReliabilityRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub left_instrument: Instrument,
    pub left_score: String,
    pub right_instrument: Instrument,
    pub right_score: String,
    pub outcome: Outcome<Correlation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub metric: Metric,
    pub outcome: Outcome<DeclineCriterion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeclineSection {
    pub criteria: Vec<CriterionRow>,
    pub flags: Vec<DeclineFlag>,
    pub declined_counts: BTreeMap<Metric, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocRow {
    pub target: Metric,
    pub instrument: Instrument,
    pub score: String,
    pub pairing: RocPairing,
    pub positives: usize,
    pub negatives: usize,
    pub outcome: Outcome<RocResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmmSection {
    pub outcome_variable: String,
    pub predictor: String,
    pub transformed: bool,
    pub outcome: Outcome<MixedModelFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub provenance: Provenance,
    pub n_participants: usize,
    pub assessments: Vec<AssessmentRecord>,
    pub cell_issues: Vec<CellIssue>,
    pub stage_means: Vec<StageMeans>,
    pub reliability: Vec<ReliabilitySection>,
    pub correlations: Vec<CorrelationRow>,
    pub declines: DeclineSection,
    pub roc: Vec<RocRow>,
    pub lmm: LmmSection,
}

impl AnalysisReport {
    /// Labels of every section that could not be computed.
    pub fn not_computable(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.reliability {
            if !r.outcome.is_ok() {
                out.push(format!("reliability/{}", r.instrument));
            }
        }
        for c in &self.correlations {
            if !c.outcome.is_ok() {
                out.push(format!("correlation/{}.{}~{}.{}", c.left_instrument, c.left_score, c.right_instrument, c.right_score));
            }
        }
        for c in &self.declines.criteria {
            if !c.outcome.is_ok() {
                out.push(format!("decline/{}", c.metric));
            }
        }
        for r in &self.roc {
            if !r.outcome.is_ok() {
                out.push(format!("roc/{}/{}.{}", r.target, r.instrument, r.score));
            }
        }
        if !self.lmm.outcome.is_ok() {
            out.push("lmm".to_owned());
        }
        out
    }

    pub fn roc_row(&self, target: Metric, instrument: Instrument, score: &str) -> Option<&RocRow> {
        self.roc.iter().find(|r| r.target == target && r.instrument == instrument && r.score == score)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn score_of(report: &ScoreReport, name: &str) -> Option<f64> {
    if name == TOTAL {
        Some(report.total)
    } else {
        report.subscale(name)
    }
}

/// (instrument, score) names in report order.
pub fn score_names(instrument: Instrument) -> Vec<&'static str> {
    let subs: &[&'static str] = match instrument {
        Instrument::CsqvrPaper | Instrument::CsqvrVr => &[CSQVR_NAUSEA, CSQVR_VESTIBULAR, CSQVR_OCULOMOTOR],
        Instrument::Ssq => &[SSQ_NAUSEA, SSQ_DISORIENTATION, SSQ_OCULOMOTOR],
        Instrument::Vrsq => &[VRSQ_DISORIENTATION, VRSQ_OCULOMOTOR],
        Instrument::Mssq => &[],
    };
    std::iter::once(TOTAL).chain(subs.iter().copied()).collect()
}

const SSQ_PAIRS: [(&str, &str); 4] = [
    (TOTAL, TOTAL),
    (CSQVR_NAUSEA, SSQ_NAUSEA),
    (CSQVR_VESTIBULAR, SSQ_DISORIENTATION),
    (CSQVR_OCULOMOTOR, SSQ_OCULOMOTOR),
];
const VRSQ_PAIRS: [(&str, &str); 3] =
    [(TOTAL, TOTAL), (CSQVR_OCULOMOTOR, VRSQ_OCULOMOTOR), (CSQVR_VESTIBULAR, VRSQ_DISORIENTATION)];

/// Timepoints at which a CSQ-VR version is compared with the pre/post
/// instruments: the paper version shares the timepoint, the in-VR version
/// pairs its Baseline with Pre and its Ride3 with Post.
fn paired_timepoints(csq: Instrument) -> [(Timepoint, Timepoint); 2] {
    match csq {
        Instrument::CsqvrVr => [(Timepoint::Baseline, Timepoint::Pre), (Timepoint::Ride3, Timepoint::Post)],
        _ => [(Timepoint::Pre, Timepoint::Pre), (Timepoint::Post, Timepoint::Post)],
    }
}

struct Scores {
    by_cell: BTreeMap<(ParticipantId, Timepoint, Instrument), ScoreReport>,
}

impl Scores {
    fn new(data: &CohortDataset) -> Self {
        let by_cell = data
            .responses
            .iter()
            .filter_map(|r| {
                score_items(r.instrument, &r.items).ok().map(|s| ((r.participant.clone(), r.timepoint, r.instrument), s))
            })
            .collect();
        Self { by_cell }
    }

    fn get(&self, p: &ParticipantId, t: Timepoint, i: Instrument, score: &str) -> Option<f64> {
        self.by_cell.get(&(p.clone(), t, i)).and_then(|r| score_of(r, score))
    }
}

fn stage_means(records: &[AssessmentRecord]) -> Vec<StageMeans> {
    Stage::ALL
        .into_iter()
        .filter_map(|stage| {
            let rs: Vec<_> = records.iter().filter(|r| r.stage == stage).collect();
            if rs.is_empty() {
                return None;
            }
            let n = rs.len() as f64;
            let pupils: Vec<f64> = rs.iter().filter_map(|r| r.pupil_mean).collect();
            Some(StageMeans {
                stage,
                n: rs.len(),
                csqvr_total: rs.iter().map(|r| r.csqvr_vr.total).sum::<f64>() / n,
                crt_rt: rs.iter().map(|r| r.crt_rt_mean).sum::<f64>() / n,
                pupil: (!pupils.is_empty()).then(|| pupils.iter().sum::<f64>() / pupils.len() as f64),
            })
        })
        .collect()
}

fn reliability(data: &CohortDataset) -> Vec<ReliabilitySection> {
    let plan = [
        (Instrument::CsqvrPaper, vec![Timepoint::Post], "post"),
        (Instrument::CsqvrVr, Stage::ALL.iter().map(|&s| s.into()).collect(), "baseline+rides"),
        (Instrument::Ssq, vec![Timepoint::Post], "post"),
        (Instrument::Vrsq, vec![Timepoint::Post], "post"),
    ];
    plan.into_iter()
        .map(|(instrument, timepoints, label)| {
            let rows: Vec<Vec<f64>> = data
                .responses
                .iter()
                .filter(|r| r.instrument == instrument && timepoints.contains(&r.timepoint))
                .map(|r| r.items.iter().map(|&v| f64::from(v)).collect())
                .collect();
            ReliabilitySection {
                instrument,
                timepoints: label.to_owned(),
                outcome: Outcome::from_result(reliability_report(&ReliabilityScheme::for_instrument(instrument), &rows)),
            }
        })
        .collect()
}

fn correlation(x: &[f64], y: &[f64], config: &AnalysisConfig) -> Result<Correlation, String> {
    if config.transform_correlations {
        let tx = orq_normalize(x, config.plotting_position).map_err(|e| e.to_string())?;
        let ty = orq_normalize(y, config.plotting_position).map_err(|e| e.to_string())?;
        pearson(&tx, &ty).map_err(|e| e.to_string())
    } else {
        pearson(x, y).map_err(|e| e.to_string())
    }
}

fn correlations(ids: &[ParticipantId], scores: &Scores, config: &AnalysisConfig) -> Vec<CorrelationRow> {
    let mut out = Vec::new();
    for csq in [Instrument::CsqvrPaper, Instrument::CsqvrVr] {
        for (other, pairs) in [(Instrument::Ssq, &SSQ_PAIRS[..]), (Instrument::Vrsq, &VRSQ_PAIRS[..])] {
            for &(left, right) in pairs {
                let (mut x, mut y) = (Vec::new(), Vec::new());
                for p in ids {
                    for (tc, to) in paired_timepoints(csq) {
                        if let (Some(a), Some(b)) = (scores.get(p, tc, csq, left), scores.get(p, to, other, right)) {
                            x.push(a);
                            y.push(b);
                        }
                    }
                }
                out.push(CorrelationRow {
                    left_instrument: csq,
                    left_score: left.to_owned(),
                    right_instrument: other,
                    right_score: right.to_owned(),
                    outcome: Outcome::from_result(correlation(&x, &y, config)),
                });
            }
        }
    }
    out
}

fn declines(records: &[AssessmentRecord], metrics: &[Metric]) -> DeclineSection {
    let criteria: Vec<CriterionRow> = metrics
        .iter()
        .map(|&metric| {
            let baseline: Vec<f64> =
                records.iter().filter(|r| r.stage == Stage::Baseline).filter_map(|r| r.metric(metric)).collect();
            CriterionRow { metric, outcome: Outcome::from_result(decline_criterion(metric.as_str(), &baseline, metric.direction())) }
        })
        .collect();
    let usable: Vec<DeclineCriterion> = criteria.iter().filter_map(|c| c.outcome.value().cloned()).collect();
    let usable_metrics: Vec<Metric> =
        criteria.iter().filter(|c| c.outcome.is_ok()).map(|c| c.metric).collect();
    let flags = flag_declines(records, &usable, &usable_metrics).expect("criteria cover the metrics");
    let mut declined_counts: BTreeMap<Metric, usize> = usable_metrics.iter().map(|&m| (m, 0)).collect();
    for f in flags.iter().filter(|f| f.declined) {
        *declined_counts.entry(f.metric).or_default() += 1;
    }
    DeclineSection { criteria, flags, declined_counts }
}

/// One (score, label) pair per ROC observation.
fn roc_observations(
    target: Metric,
    instrument: Instrument,
    score: &str,
    pairing: RocPairing,
    records: &[AssessmentRecord],
    flags: &[DeclineFlag],
    scores: &Scores,
) -> (Vec<f64>, Vec<bool>) {
    let labels: BTreeMap<(&ParticipantId, Stage), bool> =
        flags.iter().filter(|f| f.metric == target).map(|f| ((&f.participant, f.stage), f.declined)).collect();
    let vr_score = |p: &ParticipantId, s: Stage| {
        records.iter().find(|r| &r.participant == p && r.stage == s).and_then(|r| score_of(&r.csqvr_vr, score))
    };
    let post_score = |p: &ParticipantId| scores.get(p, Timepoint::Post, instrument, score);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    match pairing {
        RocPairing::Observation => {
            for (&(p, stage), &declined) in &labels {
                let v = if instrument == Instrument::CsqvrVr { vr_score(p, stage) } else { post_score(p) };
                if let Some(v) = v {
                    xs.push(v);
                    ys.push(declined);
                }
            }
        }
        RocPairing::Participant => {
            let mut by_participant: BTreeMap<&ParticipantId, (bool, Vec<Stage>)> = BTreeMap::new();
            for (&(p, stage), &declined) in &labels {
                let e = by_participant.entry(p).or_insert((false, Vec::new()));
                e.0 |= declined;
                e.1.push(stage);
            }
            for (p, (declined, stages)) in by_participant {
                let v = if instrument == Instrument::CsqvrVr {
                    stages.iter().filter_map(|&s| vr_score(p, s)).reduce(f64::max)
                } else {
                    post_score(p)
                };
                if let Some(v) = v {
                    xs.push(v);
                    ys.push(declined);
                }
            }
        }
    }
    (xs, ys)
}

fn roc(
    records: &[AssessmentRecord],
    declines: &DeclineSection,
    scores: &Scores,
    config: &AnalysisConfig,
) -> Vec<RocRow> {
    let mut out = Vec::new();
    for &target in &config.roc_targets {
        let has_criterion = declines.criteria.iter().any(|c| c.metric == target && c.outcome.is_ok());
        for instrument in [Instrument::CsqvrPaper, Instrument::CsqvrVr, Instrument::Ssq, Instrument::Vrsq] {
            for score in score_names(instrument) {
                let (xs, ys) =
                    roc_observations(target, instrument, score, config.roc_pairing, records, &declines.flags, scores);
                let positives = ys.iter().filter(|&&l| l).count();
                let outcome = if has_criterion {
                    Outcome::from_result(optimal_cutoff(&xs, &ys))
                } else {
                    Outcome::NotComputable { reason: format!("no decline criterion for {target}") }
                };
                out.push(RocRow {
                    target,
                    instrument,
                    score: score.to_owned(),
                    pairing: config.roc_pairing,
                    positives,
                    negatives: ys.len() - positives,
                    outcome,
                });
            }
        }
    }
    out
}

fn lmm(records: &[AssessmentRecord], config: &AnalysisConfig) -> LmmSection {
    let rows: Vec<&AssessmentRecord> = records.iter().filter(|r| r.pupil_mean.is_some()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.csqvr_vr.total).collect();
    let x: Vec<f64> = rows.iter().filter_map(|r| r.pupil_mean).collect();
    let groups: Vec<&ParticipantId> = rows.iter().map(|r| &r.participant).collect();
    let fit = || -> Result<MixedModelFit, String> {
        let (y, x) = if config.transform_lmm {
            (
                orq_normalize(&y, config.plotting_position).map_err(|e| format!("outcome: {e}"))?,
                orq_normalize(&x, config.plotting_position).map_err(|e| format!("predictor: {e}"))?,
            )
        } else {
            (y.clone(), x.clone())
        };
        fit_random_intercept(&y, &x, &groups, config.lmm_method).map_err(|e| e.to_string())
    };
    LmmSection {
        outcome_variable: "csqvr_vr.total".to_owned(),
        predictor: "pupil_mean".to_owned(),
        transformed: config.transform_lmm,
        outcome: Outcome::from_result(fit()),
    }
}

/// Runs the whole pipeline. Pure: identical inputs give identical reports.
pub fn analyze(data: &CohortDataset, config: &AnalysisConfig, inputs: Vec<InputDigest>) -> AnalysisReport {
    let (records, cell_issues) = assemble_records(data);
    let ids = data.participant_ids();
    let scores = Scores::new(data);
    let declines = declines(&records, &config.decline_metrics);
    let roc = roc(&records, &declines, &scores, config);
    let participants: BTreeSet<&ParticipantId> = records.iter().map(|r| &r.participant).collect();
    AnalysisReport {
        provenance: Provenance {
            software: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            seed: config.seed,
            config: config.clone(),
            inputs,
            generated_at: None,
        },
        n_participants: participants.len(),
        stage_means: stage_means(&records),
        reliability: reliability(data),
        correlations: correlations(&ids, &scores, config),
        lmm: lmm(&records, config),
        declines,
        roc,
        cell_issues,
        assessments: records,
    }
}

/// Digests of the files ingest would read for `paths`, in read order.
pub fn digest_inputs<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<InputDigest>, IngestError> {
    let mut out = Vec::new();
    for p in paths {
        let p = p.as_ref();
        let files: Vec<_> = if p.is_dir() {
            [crate::io::PARTICIPANTS_FILE, crate::io::RESPONSES_FILE, crate::io::TRIALS_FILE, crate::io::GAZE_FILE]
                .iter()
                .map(|n| p.join(n))
                .filter(|f| f.exists())
                .collect()
        } else {
            vec![p.to_owned()]
        };
        for f in files {
            let bytes = std::fs::read(&f).map_err(|e| IngestError::Io { path: f.clone(), message: e.to_string() })?;
            let name = f.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            out.push(InputDigest::of(name, &bytes));
        }
    }
    Ok(out)
}

/// Ingests `paths` and analyses the result, recording input digests.
pub fn analyze_paths<P: AsRef<Path>>(paths: &[P], config: &AnalysisConfig) -> Result<AnalysisReport, IngestError> {
    let data = ingest(paths)?;
    let inputs = digest_inputs(paths)?;
    Ok(analyze(&data, config, inputs))
}
