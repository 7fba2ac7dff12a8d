use serde::{Deserialize, Serialize};

use super::{cronbach_alpha, interpret_alpha, AlphaBand, PsychometricsError};
use crate::domain::{Instrument, QuestionnaireResponse};
use crate::scoring::{subscale_items, SsqFactor, VRSQ_DISORIENTATION, VRSQ_OCULOMOTOR};

/// How an instrument's sub-scale scores are built from raw items: each
/// sub-scale is `weight × Σ items`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityScheme {
    pub label: String,
    pub subscales: Vec<(String, Vec<usize>, f64)>,
}

impl ReliabilityScheme {
    pub fn for_instrument(instrument: Instrument) -> Self {
        let weight = |name: &str| match instrument {
            Instrument::Ssq => SsqFactor::ALL
                .iter()
                .find(|f| f.name() == name)
                .map_or(1.0, |f| f.weight()),
            Instrument::Vrsq if name == VRSQ_OCULOMOTOR => 100.0 / 12.0,
            Instrument::Vrsq if name == VRSQ_DISORIENTATION => 100.0 / 15.0,
            _ => 1.0,
        };
        Self {
            label: instrument.as_str().to_owned(),
            subscales: subscale_items(instrument)
                .into_iter()
                .map(|(name, idx)| (name.to_owned(), idx, weight(name)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityRow {
    pub instrument: String,
    /// `total` or a sub-scale name.
    pub score: String,
    pub alpha: f64,
    pub band: AlphaBand,
    pub n: usize,
    pub k: usize,
}

/// α of the total score (sub-scale scores as items) followed by α of each
/// sub-scale over its raw items.
pub fn reliability_report(
    scheme: &ReliabilityScheme,
    item_rows: &[Vec<f64>],
) -> Result<Vec<ReliabilityRow>, PsychometricsError> {
    if item_rows.len() < 3 {
        return Err(PsychometricsError::TooFewObservations { needed: 3, actual: item_rows.len() });
    }
    let sub_scores: Vec<Vec<f64>> = item_rows
        .iter()
        .map(|row| {
            scheme
                .subscales
                .iter()
                .map(|(_, idx, w)| w * idx.iter().map(|&i| row[i]).sum::<f64>())
                .collect()
        })
        .collect();
    let row = |score: &str, rows: &[Vec<f64>]| -> Result<ReliabilityRow, PsychometricsError> {
        let alpha = cronbach_alpha(rows)?;
        Ok(ReliabilityRow {
            instrument: scheme.label.clone(),
            score: score.to_owned(),
            alpha,
            band: interpret_alpha(alpha).band,
            n: rows.len(),
            k: rows[0].len(),
        })
    };
    let mut out = vec![row("total", &sub_scores)?];
    for (name, idx, _) in &scheme.subscales {
        let rows: Vec<Vec<f64>> = item_rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect();
        out.push(row(name, &rows)?);
    }
    Ok(out)
}

/// Convenience wrapper over validated responses of one instrument.
pub fn reliability_for_responses(
    instrument: Instrument,
    responses: &[&QuestionnaireResponse],
) -> Result<Vec<ReliabilityRow>, PsychometricsError> {
    let rows: Vec<Vec<f64>> = responses
        .iter()
        .filter(|r| r.instrument == instrument)
        .map(|r| r.items.iter().map(|&v| f64::from(v)).collect())
        .collect();
    reliability_report(&ReliabilityScheme::for_instrument(instrument), &rows)
}
