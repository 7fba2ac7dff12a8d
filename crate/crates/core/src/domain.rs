//! Shared vocabulary: stages, instruments, questionnaire responses, score
//! reports, gaze samples and per-stage assessment records.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque participant identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParticipantId(pub String);

impl ParticipantId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ParticipantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ParticipantId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

/// Assessment stage inside the immersive session. Baseline precedes the rides.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Baseline,
    Ride1,
    Ride2,
    Ride3,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Baseline, Stage::Ride1, Stage::Ride2, Stage::Ride3];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Baseline => "baseline",
            Stage::Ride1 => "ride1",
            Stage::Ride2 => "ride2",
            Stage::Ride3 => "ride3",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_ride(self) -> bool {
        self != Stage::Baseline
    }

    pub fn next(self) -> Option<Stage> {
        Stage::ALL.get(self.index() + 1).copied()
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ParseEnumError::new("stage", s))
    }
}

/// When a questionnaire was answered: before immersion, at one of the four
/// in-VR stages, or after the session.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Timepoint {
    Pre,
    Baseline,
    Ride1,
    Ride2,
    Ride3,
    Post,
}

impl Timepoint {
    pub const ALL: [Timepoint; 6] = [
        Timepoint::Pre,
        Timepoint::Baseline,
        Timepoint::Ride1,
        Timepoint::Ride2,
        Timepoint::Ride3,
        Timepoint::Post,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Timepoint::Pre => "pre",
            Timepoint::Post => "post",
            other => other.stage().expect("in-VR timepoint").as_str(),
        }
    }

    pub fn stage(self) -> Option<Stage> {
        match self {
            Timepoint::Baseline => Some(Stage::Baseline),
            Timepoint::Ride1 => Some(Stage::Ride1),
            Timepoint::Ride2 => Some(Stage::Ride2),
            Timepoint::Ride3 => Some(Stage::Ride3),
            Timepoint::Pre | Timepoint::Post => None,
        }
    }
}

impl From<Stage> for Timepoint {
    fn from(s: Stage) -> Self {
        match s {
            Stage::Baseline => Timepoint::Baseline,
            Stage::Ride1 => Timepoint::Ride1,
            Stage::Ride2 => Timepoint::Ride2,
            Stage::Ride3 => Timepoint::Ride3,
        }
    }
}

impl fmt::Display for Timepoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Timepoint {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Timepoint::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ParseEnumError::new("timepoint", s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind} `{value}`")]
pub struct ParseEnumError {
    pub kind: &'static str,
    pub value: String,
}

impl ParseEnumError {
    fn new(kind: &'static str, value: &str) -> Self {
        Self { kind, value: value.to_owned() }
    }
}

/// Questionnaire instruments understood by the toolkit.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Instrument {
    #[serde(rename = "CSQVR_paper")]
    CsqvrPaper,
    #[serde(rename = "CSQVR_vr")]
    CsqvrVr,
    #[serde(rename = "SSQ")]
    Ssq,
    #[serde(rename = "VRSQ")]
    Vrsq,
    #[serde(rename = "MSSQ")]
    Mssq,
}

impl Instrument {
    pub const ALL: [Instrument; 5] = [
        Instrument::CsqvrPaper,
        Instrument::CsqvrVr,
        Instrument::Ssq,
        Instrument::Vrsq,
        Instrument::Mssq,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Instrument::CsqvrPaper => "CSQVR_paper",
            Instrument::CsqvrVr => "CSQVR_vr",
            Instrument::Ssq => "SSQ",
            Instrument::Vrsq => "VRSQ",
            Instrument::Mssq => "MSSQ",
        }
    }

    pub fn item_count(self) -> usize {
        match self {
            Instrument::CsqvrPaper | Instrument::CsqvrVr => 6,
            Instrument::Ssq => 16,
            Instrument::Vrsq => 9,
            Instrument::Mssq => 18,
        }
    }

    /// Inclusive response range for every item.
    pub fn item_range(self) -> (u8, u8) {
        match self {
            Instrument::CsqvrPaper | Instrument::CsqvrVr => (1, 7),
            Instrument::Ssq | Instrument::Vrsq | Instrument::Mssq => (0, 3),
        }
    }

    pub fn is_csqvr(self) -> bool {
        matches!(self, Instrument::CsqvrPaper | Instrument::CsqvrVr)
    }
}

impl fmt::Display for Instrument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Instrument {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().replace('-', "_");
        Instrument::ALL
            .into_iter()
            .find(|i| i.as_str().eq_ignore_ascii_case(&norm))
            .ok_or_else(|| ParseEnumError::new("instrument", s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Female,
    Male,
    Other,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominantEye {
    Left,
    Right,
    Unknown,
}

/// Demographics and screening data. Treated as pass-through by the analyses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantRecord {
    pub id: ParticipantId,
    pub age: u32,
    pub sex: Sex,
    /// Years of education.
    pub education: f64,
    /// Each experience score is the sum of two 1..6 items, hence 2..12.
    pub experience_vr: u8,
    pub experience_computing: u8,
    pub experience_gaming: u8,
    pub mssq_total: f64,
    pub dominant_eye: DominantEye,
}

/// Ordered item responses of one participant to one instrument at one timepoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionnaireResponse {
    pub participant: ParticipantId,
    pub instrument: Instrument,
    pub timepoint: Timepoint,
    pub items: Vec<u8>,
}

impl QuestionnaireResponse {
    pub fn new(
        participant: impl Into<ParticipantId>,
        instrument: Instrument,
        timepoint: Timepoint,
        items: Vec<u8>,
    ) -> Self {
        Self { participant: participant.into(), instrument, timepoint, items }
    }
}

impl From<String> for ParticipantId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("{instrument} expects {expected} items, got {actual}")]
    WrongItemCount { instrument: Instrument, expected: usize, actual: usize },
    #[error("{instrument} item {index} has value {value}, allowed range {min}..={max}")]
    ItemOutOfRange { instrument: Instrument, index: usize, value: i64, min: u8, max: u8 },
    #[error("{instrument} item {index} is not an integer response: {value}")]
    NonIntegerItem { instrument: Instrument, index: usize, value: f64 },
}

/// Returns the response unchanged iff its item count and item ranges fit the
/// instrument.
pub fn validate_response(r: QuestionnaireResponse) -> Result<QuestionnaireResponse, ValidationError> {
    validate_items(r.instrument, &r.items)?;
    Ok(r)
}

pub fn validate_items(instrument: Instrument, items: &[u8]) -> Result<(), ValidationError> {
    let expected = instrument.item_count();
    if items.len() != expected {
        return Err(ValidationError::WrongItemCount { instrument, expected, actual: items.len() });
    }
    let (min, max) = instrument.item_range();
    if let Some((index, &value)) = items.iter().enumerate().find(|(_, v)| !(min..=max).contains(*v)) {
        return Err(ValidationError::ItemOutOfRange {
            instrument,
            index,
            value: i64::from(value),
            min,
            max,
        });
    }
    Ok(())
}

/// Converts real-valued item entries (as read from spreadsheets) into integer
/// responses, rejecting fractional or out-of-range values.
pub fn items_from_reals(instrument: Instrument, values: &[f64]) -> Result<Vec<u8>, ValidationError> {
    let (min, max) = instrument.item_range();
    let items = values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if !value.is_finite() || value.fract() != 0.0 {
                return Err(ValidationError::NonIntegerItem { instrument, index, value });
            }
            if value < f64::from(min) || value > f64::from(max) {
                return Err(ValidationError::ItemOutOfRange {
                    instrument,
                    index,
                    value: value as i64,
                    min,
                    max,
                });
            }
            Ok(value as u8)
        })
        .collect::<Result<Vec<_>, _>>()?;
    validate_items(instrument, &items)?;
    Ok(items)
}

/// Which scoring convention produced a [`ScoreReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreVariant {
    /// The instrument's only scoring rule (CSQ-VR, VRSQ, MSSQ).
    Standard,
    /// SSQ factor sums times the published weights.
    SsqWeighted,
    /// SSQ weighted scores rescaled to percent of their maxima.
    SsqNormalized,
}

/// Total and sub-scale scores for one response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub instrument: Instrument,
    pub variant: ScoreVariant,
    pub total: f64,
    pub subscales: BTreeMap<String, f64>,
    pub max_total: f64,
    /// Largest attainable sub-scale score.
    pub max_subscale: f64,
}

impl ScoreReport {
    pub fn subscale(&self, name: &str) -> Option<f64> {
        self.subscales.get(name).copied()
    }
}

/// One eye-tracker sample. `t` is in milliseconds relative to the start of the
/// episode the stream belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t: i64,
    pub gaze_target_hit: bool,
    pub pupil_left: Pupil,
    pub pupil_right: Pupil,
}

/// Pupil diameter in millimetres, or an explicit invalid marker (blink, lost
/// tracking). Invalid readings never enter arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "Option<f64>", into = "Option<f64>")]
pub enum Pupil {
    Valid(f64),
    Invalid,
}

impl Pupil {
    /// Non-positive or non-finite readings are treated as invalid.
    pub fn from_mm(mm: f64) -> Self {
        if mm.is_finite() && mm > 0.0 {
            Pupil::Valid(mm)
        } else {
            Pupil::Invalid
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Pupil::Valid(v) => Some(v),
            Pupil::Invalid => None,
        }
    }
}

impl From<Option<f64>> for Pupil {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Pupil::Invalid, Pupil::from_mm)
    }
}

impl From<Pupil> for Option<f64> {
    fn from(p: Pupil) -> Self {
        p.value()
    }
}

/// Everything measured for one participant at one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentRecord {
    pub participant: ParticipantId,
    pub stage: Stage,
    pub csqvr_vr: ScoreReport,
    pub bdst_score: u32,
    pub bcbt_score: u32,
    pub srt_mean: f64,
    pub crt_rt_mean: f64,
    /// Absent when no correct CRT trial carried gaze data.
    pub crt_at_mean: Option<f64>,
    pub crt_mt_mean: Option<f64>,
    /// Absent when the questionnaire episode had no valid pupil sample.
    pub pupil_mean: Option<f64>,
}

/// Metrics of an [`AssessmentRecord`] that can be checked for decline.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Bdst,
    Bcbt,
    SrtMean,
    CrtRt,
    CrtAt,
    CrtMt,
}

impl Metric {
    pub const ALL: [Metric; 6] =
        [Metric::Bdst, Metric::Bcbt, Metric::SrtMean, Metric::CrtRt, Metric::CrtAt, Metric::CrtMt];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Bdst => "bdst",
            Metric::Bcbt => "bcbt",
            Metric::SrtMean => "srt_mean",
            Metric::CrtRt => "crt_rt",
            Metric::CrtAt => "crt_at",
            Metric::CrtMt => "crt_mt",
        }
    }

    /// Working-memory scores get worse downward; times get worse upward.
    pub fn direction(self) -> crate::psychometrics::Direction {
        use crate::psychometrics::Direction;
        match self {
            Metric::Bdst | Metric::Bcbt => Direction::LowerIsWorse,
            _ => Direction::HigherIsWorse,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ParseEnumError::new("metric", s))
    }
}

impl AssessmentRecord {
    pub fn metric(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Bdst => Some(f64::from(self.bdst_score)),
            Metric::Bcbt => Some(f64::from(self.bcbt_score)),
            Metric::SrtMean => Some(self.srt_mean),
            Metric::CrtRt => Some(self.crt_rt_mean),
            Metric::CrtAt => self.crt_at_mean,
            Metric::CrtMt => self.crt_mt_mean,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resp(instrument: Instrument, items: Vec<u8>) -> QuestionnaireResponse {
        QuestionnaireResponse::new("p01", instrument, Timepoint::Pre, items)
    }

    #[test]
    fn minimum_csqvr_response_is_valid() {
        let r = resp(Instrument::CsqvrVr, vec![1; 6]);
        assert_eq!(validate_response(r.clone()), Ok(r));
    }

    #[test]
    fn short_csqvr_response_is_rejected() {
        let err = validate_response(resp(Instrument::CsqvrPaper, vec![1; 5])).unwrap_err();
        assert_eq!(
            err,
            ValidationError::WrongItemCount {
                instrument: Instrument::CsqvrPaper,
                expected: 6,
                actual: 5
            }
        );
    }

    #[test]
    fn ssq_item_above_three_is_rejected_with_index() {
        let mut items = vec![0; 16];
        items[9] = 4;
        match validate_response(resp(Instrument::Ssq, items)) {
            Err(ValidationError::ItemOutOfRange { index, value, .. }) => {
                assert_eq!((index, value), (9, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csqvr_zero_is_out_of_range() {
        assert!(matches!(
            validate_items(Instrument::CsqvrVr, &[0, 1, 1, 1, 1, 1]),
            Err(ValidationError::ItemOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn stage_order_is_total() {
        assert!(Stage::Baseline < Stage::Ride1);
        assert!(Stage::Ride1 < Stage::Ride2 && Stage::Ride2 < Stage::Ride3);
        assert_eq!(Stage::Ride3.next(), None);
        for s in Stage::ALL {
            assert_eq!(s.as_str().parse::<Stage>().unwrap(), s);
            assert_eq!(Timepoint::from(s).stage(), Some(s));
        }
    }

    #[test]
    fn pupil_sentinels_become_invalid() {
        assert_eq!(Pupil::from_mm(0.0), Pupil::Invalid);
        assert_eq!(Pupil::from_mm(-1.0), Pupil::Invalid);
        assert_eq!(Pupil::from_mm(f64::NAN), Pupil::Invalid);
        assert_eq!(Pupil::from_mm(3.5).value(), Some(3.5));
    }

    #[test]
    fn instrument_names_parse_loosely() {
        assert_eq!("csqvr-vr".parse::<Instrument>().unwrap(), Instrument::CsqvrVr);
        assert_eq!("SSQ".parse::<Instrument>().unwrap(), Instrument::Ssq);
        assert!("PANAS".parse::<Instrument>().is_err());
    }
}
