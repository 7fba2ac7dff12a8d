//! Normalising transforms, pupil aggregation and the random-intercept mixed
//! model.

pub mod lmm;
pub mod normal;
pub mod orq;
pub mod pupil;

use thiserror::Error;

pub use lmm::{fit_random_intercept, LmmError, LmmMethod, MixedModelData, MixedModelFit};
pub use normal::{normal_cdf, normal_quantile};
pub use orq::{orq_fit, orq_normalize, OrqTransform, PlottingPosition};
pub use pupil::pupil_mean;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least {needed} values, got {actual}")]
    TooFewValues { needed: usize, actual: usize },
    #[error("all values are identical")]
    AllValuesIdentical,
    #[error("standard deviation is zero")]
    ZeroVariance,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("no valid pupil samples")]
    NoValidSamples,
}

/// Standardises to mean 0 and (n−1) standard deviation 1.
pub fn center_scale(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFewValues { needed: 2, actual: values.len() });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(i));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd == 0.0 || sd <= f64::EPSILON * mean.abs() {
        return Err(StatsError::ZeroVariance);
    }
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}
