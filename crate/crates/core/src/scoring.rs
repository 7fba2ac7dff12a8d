//! Scoring rules for CSQ-VR, SSQ, VRSQ and MSSQ, plus the demographic
//! experience items and MSSQ pre-screening.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate_items, Instrument, ScoreReport, ScoreVariant, ValidationError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("{instrument} cannot be scored by this function")]
    WrongInstrument { instrument: Instrument },
    #[error("experience item out of range 1..=6: {value}")]
    ExperienceItemOutOfRange { value: u8 },
    #[error("no MSSQ 75th-percentile cut-off configured")]
    MissingCutoffConfig,
}

pub const CSQVR_NAUSEA: &str = "nausea";
pub const CSQVR_VESTIBULAR: &str = "vestibular";
pub const CSQVR_OCULOMOTOR: &str = "oculomotor";

pub const SSQ_NAUSEA: &str = "nausea";
pub const SSQ_OCULOMOTOR: &str = "oculomotor";
pub const SSQ_DISORIENTATION: &str = "disorientation";

pub const VRSQ_OCULOMOTOR: &str = "oculomotor";
pub const VRSQ_DISORIENTATION: &str = "disorientation";

pub const MSSQ_CHILD: &str = "child";
pub const MSSQ_ADULT: &str = "adult";

/// Item indices (0-based) forming each CSQ-VR sub-scale.
pub const CSQVR_SUBSCALES: [(&str, [usize; 2]); 3] = [
    (CSQVR_NAUSEA, [0, 1]),
    (CSQVR_VESTIBULAR, [2, 3]),
    (CSQVR_OCULOMOTOR, [4, 5]),
];

/// Scores a six-item CSQ-VR response, items ordered as two nausea, two
/// vestibular then two oculomotor questions.
pub fn score_csqvr(instrument: Instrument, items: &[u8]) -> Result<ScoreReport, ScoringError> {
    if !instrument.is_csqvr() {
        return Err(ScoringError::WrongInstrument { instrument });
    }
    validate_items(instrument, items)?;
    let mut subscales = BTreeMap::new();
    let mut total = 0u32;
    for (name, idx) in CSQVR_SUBSCALES {
        let s: u32 = idx.iter().map(|&i| u32::from(items[i])).sum();
        total += s;
        subscales.insert(name.to_owned(), f64::from(s));
    }
    Ok(ScoreReport {
        instrument,
        variant: ScoreVariant::Standard,
        total: f64::from(total),
        subscales,
        max_total: 42.0,
        max_subscale: 14.0,
    })
}

/// SSQ factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SsqFactor {
    Nausea,
    Oculomotor,
    Disorientation,
}

impl SsqFactor {
    pub const ALL: [SsqFactor; 3] =
        [SsqFactor::Nausea, SsqFactor::Oculomotor, SsqFactor::Disorientation];

    pub fn name(self) -> &'static str {
        match self {
            SsqFactor::Nausea => SSQ_NAUSEA,
            SsqFactor::Oculomotor => SSQ_OCULOMOTOR,
            SsqFactor::Disorientation => SSQ_DISORIENTATION,
        }
    }

    pub fn weight(self) -> f64 {
        match self {
            SsqFactor::Nausea => 9.54,
            SsqFactor::Oculomotor => 7.58,
            SsqFactor::Disorientation => 13.92,
        }
    }
}

pub const SSQ_TOTAL_WEIGHT: f64 = 3.74;

/// Kennedy et al. item-to-factor loadings, in canonical item order:
/// general discomfort, fatigue, headache, eyestrain, difficulty focusing,
/// increased salivation, sweating, nausea, difficulty concentrating, fullness
/// of head, blurred vision, dizzy (eyes open), dizzy (eyes closed), vertigo,
/// stomach awareness, burping.
pub const SSQ_FACTOR_MAP: [&[SsqFactor]; 16] = {
    use SsqFactor::*;
    [
        &[Nausea, Oculomotor],
        &[Oculomotor],
        &[Oculomotor],
        &[Oculomotor],
        &[Oculomotor, Disorientation],
        &[Nausea],
        &[Nausea],
        &[Nausea, Disorientation],
        &[Nausea, Oculomotor],
        &[Disorientation],
        &[Oculomotor, Disorientation],
        &[Disorientation],
        &[Disorientation],
        &[Disorientation],
        &[Nausea],
        &[Nausea],
    ]
};

/// 0-based SSQ item indices loading on `factor`.
pub fn ssq_factor_items(factor: SsqFactor) -> Vec<usize> {
    SSQ_FACTOR_MAP
        .iter()
        .enumerate()
        .filter(|(_, fs)| fs.contains(&factor))
        .map(|(i, _)| i)
        .collect()
}

/// Both SSQ scoring variants for one response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsqScores {
    pub raw: BTreeMap<String, u32>,
    pub weighted: ScoreReport,
    pub normalized: ScoreReport,
}

pub fn score_ssq(items: &[u8]) -> Result<SsqScores, ScoringError> {
    validate_items(Instrument::Ssq, items)?;
    let mut raw = BTreeMap::new();
    let mut weighted = BTreeMap::new();
    let mut normalized = BTreeMap::new();
    let mut raw_sum = 0u32;
    let mut max_weighted_sub = 0.0f64;
    let mut normalized_total = 0.0;
    for factor in SsqFactor::ALL {
        let idx = ssq_factor_items(factor);
        let r: u32 = idx.iter().map(|&i| u32::from(items[i])).sum();
        let w = f64::from(r) * factor.weight();
        let max_w = (3 * idx.len()) as f64 * factor.weight();
        let n = w / max_w * 100.0;
        raw_sum += r;
        max_weighted_sub = max_weighted_sub.max(max_w);
        normalized_total += n;
        raw.insert(factor.name().to_owned(), r);
        weighted.insert(factor.name().to_owned(), w);
        normalized.insert(factor.name().to_owned(), n);
    }
    let max_raw_sum: u32 = SsqFactor::ALL.iter().map(|&f| 3 * ssq_factor_items(f).len() as u32).sum();
    Ok(SsqScores {
        raw,
        weighted: ScoreReport {
            instrument: Instrument::Ssq,
            variant: ScoreVariant::SsqWeighted,
            total: f64::from(raw_sum) * SSQ_TOTAL_WEIGHT,
            subscales: weighted,
            max_total: f64::from(max_raw_sum) * SSQ_TOTAL_WEIGHT,
            max_subscale: max_weighted_sub,
        },
        normalized: ScoreReport {
            instrument: Instrument::Ssq,
            variant: ScoreVariant::SsqNormalized,
            total: normalized_total,
            subscales: normalized,
            max_total: 300.0,
            max_subscale: 100.0,
        },
    })
}

/// VRSQ items: four oculomotor (general discomfort, fatigue, eyestrain,
/// difficulty focusing) then five disorientation (headache, fullness of head,
/// blurred vision, dizzy with eyes closed, vertigo).
pub const VRSQ_OCULOMOTOR_ITEMS: std::ops::Range<usize> = 0..4;
pub const VRSQ_DISORIENTATION_ITEMS: std::ops::Range<usize> = 4..9;

pub fn score_vrsq(items: &[u8]) -> Result<ScoreReport, ScoringError> {
    validate_items(Instrument::Vrsq, items)?;
    let sum = |r: std::ops::Range<usize>| items[r].iter().map(|&v| f64::from(v)).sum::<f64>();
    let oculomotor = sum(VRSQ_OCULOMOTOR_ITEMS) / 12.0 * 100.0;
    let disorientation = sum(VRSQ_DISORIENTATION_ITEMS) / 15.0 * 100.0;
    let subscales = BTreeMap::from([
        (VRSQ_OCULOMOTOR.to_owned(), oculomotor),
        (VRSQ_DISORIENTATION.to_owned(), disorientation),
    ]);
    Ok(ScoreReport {
        instrument: Instrument::Vrsq,
        variant: ScoreVariant::Standard,
        total: (oculomotor + disorientation) / 2.0,
        subscales,
        max_total: 100.0,
        max_subscale: 100.0,
    })
}

/// Child, adult and total MSSQ sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MssqScores {
    pub child: f64,
    pub adult: f64,
    pub total: f64,
}

/// First nine items describe childhood, the last nine adulthood.
pub fn score_mssq(items: &[u8]) -> Result<MssqScores, ScoringError> {
    validate_items(Instrument::Mssq, items)?;
    let child: u32 = items[..9].iter().map(|&v| u32::from(v)).sum();
    let adult: u32 = items[9..].iter().map(|&v| u32::from(v)).sum();
    Ok(MssqScores {
        child: f64::from(child),
        adult: f64::from(adult),
        total: f64::from(child + adult),
    })
}

impl MssqScores {
    pub fn to_report(self) -> ScoreReport {
        ScoreReport {
            instrument: Instrument::Mssq,
            variant: ScoreVariant::Standard,
            total: self.total,
            subscales: BTreeMap::from([
                (MSSQ_CHILD.to_owned(), self.child),
                (MSSQ_ADULT.to_owned(), self.adult),
            ]),
            max_total: 54.0,
            max_subscale: 27.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eligibility {
    Eligible,
    Ineligible,
}

/// Pre-enrolment screening against a configured 75th-percentile norm.
/// A total equal to the cut-off is still eligible.
pub fn mssq_screen(total: f64, cutoff_75th: Option<f64>) -> Result<Eligibility, ScoringError> {
    let cutoff = cutoff_75th.ok_or(ScoringError::MissingCutoffConfig)?;
    Ok(if total <= cutoff { Eligibility::Eligible } else { Eligibility::Ineligible })
}

/// Experience with VR, computing or gaming: ability plus frequency, each 1..6.
pub fn score_experience(ability: u8, frequency: u8) -> Result<u8, ScoringError> {
    for value in [ability, frequency] {
        if !(1..=6).contains(&value) {
            return Err(ScoringError::ExperienceItemOutOfRange { value });
        }
    }
    Ok(ability + frequency)
}

/// Scores a response with the instrument's default convention (weighted for SSQ).
pub fn score_items(instrument: Instrument, items: &[u8]) -> Result<ScoreReport, ScoringError> {
    match instrument {
        Instrument::CsqvrPaper | Instrument::CsqvrVr => score_csqvr(instrument, items),
        Instrument::Ssq => score_ssq(items).map(|s| s.weighted),
        Instrument::Vrsq => score_vrsq(items),
        Instrument::Mssq => score_mssq(items).map(MssqScores::to_report),
    }
}

/// Every score variant for a response; SSQ yields two reports.
pub fn score_all_variants(instrument: Instrument, items: &[u8]) -> Result<Vec<ScoreReport>, ScoringError> {
    match instrument {
        Instrument::Ssq => score_ssq(items).map(|s| vec![s.weighted, s.normalized]),
        other => score_items(other, items).map(|r| vec![r]),
    }
}

/// Names and 0-based item indices of each sub-scale of an instrument.
pub fn subscale_items(instrument: Instrument) -> Vec<(&'static str, Vec<usize>)> {
    match instrument {
        Instrument::CsqvrPaper | Instrument::CsqvrVr => {
            CSQVR_SUBSCALES.iter().map(|(n, idx)| (*n, idx.to_vec())).collect()
        }
        Instrument::Ssq => SsqFactor::ALL.iter().map(|&f| (f.name(), ssq_factor_items(f))).collect(),
        Instrument::Vrsq => vec![
            (VRSQ_OCULOMOTOR, VRSQ_OCULOMOTOR_ITEMS.collect()),
            (VRSQ_DISORIENTATION, VRSQ_DISORIENTATION_ITEMS.collect()),
        ],
        Instrument::Mssq => vec![(MSSQ_CHILD, (0..9).collect()), (MSSQ_ADULT, (9..18).collect())],
    }
}
