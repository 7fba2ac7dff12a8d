use super::StatsError;
use crate::domain::GazeSample;

/// Mean pupil diameter over an episode. Each sample contributes the mean of
/// both eyes when both are valid, else the single valid eye; samples with no
/// valid eye are skipped.
pub fn pupil_mean(samples: &[GazeSample]) -> Result<f64, StatsError> {
    let mut values: Vec<f64> = samples
        .iter()
        .filter_map(|s| match (s.pupil_left.value(), s.pupil_right.value()) {
            (Some(l), Some(r)) => Some((l + r) / 2.0),
            (Some(v), None) | (None, Some(v)) => Some(v),
            (None, None) => None,
        })
        .collect();
    if values.is_empty() {
        return Err(StatsError::NoValidSamples);
    }
    // fixed summation order makes the mean independent of sample order
    values.sort_by(f64::total_cmp);
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
