//! Reliability, convergent validity, decline detection and ROC suitability.

pub mod alpha;
pub mod correlation;
pub mod decline;
pub mod reliability;
pub mod roc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use alpha::{cronbach_alpha, interpret_alpha, AlphaBand, AlphaInterpretation};
pub use correlation::{pearson, Correlation};
pub use decline::{decline_criterion, flag_declines, DeclineCriterion, DeclineFlag};
pub use reliability::{reliability_report, ReliabilityRow, ReliabilityScheme};
pub use roc::{
    confusion_at, is_suitable, optimal_cutoff, roc_auc, roc_curve, trapezoid_auc, Confusion,
    RocPoint, RocResult,
};

/// Which side of a metric indicates worse performance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsWorse,
    LowerIsWorse,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PsychometricsError {
    #[error("need at least {needed} items, got {actual}")]
    TooFewItems { needed: usize, actual: usize },
    #[error("need at least {needed} observations, got {actual}")]
    TooFewObservations { needed: usize, actual: usize },
    #[error("rows have unequal lengths")]
    RaggedMatrix,
    #[error("total-score variance is zero")]
    DegenerateVariance,
    #[error("input is constant")]
    ConstantInput,
    #[error("inputs differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("baseline sample has zero spread")]
    DegenerateBaseline,
    #[error("only one class present in labels")]
    SingleClass,
    #[error("no decline criterion for metric `{0}`")]
    MissingCriterion(String),
}

pub(crate) fn check_finite(values: &[f64]) -> Result<(), PsychometricsError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(PsychometricsError::NonFinite(i)),
        None => Ok(()),
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with the n−1 denominator.
pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}
