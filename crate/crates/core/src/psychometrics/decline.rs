use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_finite, mean, sample_variance, Direction, PsychometricsError};
use crate::domain::{AssessmentRecord, Metric, ParticipantId, Stage};

/// Group-baseline criterion: a post-ride value beyond two baseline standard
/// deviations in the worse direction counts as a temporary decline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeclineCriterion {
    pub metric: String,
    pub direction: Direction,
    pub baseline_mean: f64,
    pub baseline_sd: f64,
    pub threshold: f64,
}

impl DeclineCriterion {
    pub fn from_moments(metric: impl Into<String>, direction: Direction, mean: f64, sd: f64) -> Self {
        let threshold = match direction {
            Direction::HigherIsWorse => mean + 2.0 * sd,
            Direction::LowerIsWorse => mean - 2.0 * sd,
        };
        Self { metric: metric.into(), direction, baseline_mean: mean, baseline_sd: sd, threshold }
    }

    /// Strictly beyond the threshold; a value equal to it is not a decline.
    pub fn is_declined(&self, value: f64) -> bool {
        match self.direction {
            Direction::HigherIsWorse => value > self.threshold,
            Direction::LowerIsWorse => value < self.threshold,
        }
    }
}

/// Builds the criterion from one baseline value per participant.
pub fn decline_criterion(
    metric: impl Into<String>,
    baseline_values: &[f64],
    direction: Direction,
) -> Result<DeclineCriterion, PsychometricsError> {
    if baseline_values.len() < 3 {
        return Err(PsychometricsError::TooFewObservations { needed: 3, actual: baseline_values.len() });
    }
    check_finite(baseline_values)?;
    let sd = sample_variance(baseline_values).sqrt();
    if sd <= 0.0 {
        return Err(PsychometricsError::DegenerateBaseline);
    }
    Ok(DeclineCriterion::from_moments(metric, direction, mean(baseline_values), sd))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeclineFlag {
    pub participant: ParticipantId,
    pub stage: Stage,
    pub metric: Metric,
    pub value: f64,
    pub threshold: f64,
    pub declined: bool,
}

/// Flags every post-baseline (participant, stage, metric) cell. Cells whose
/// metric is undefined (e.g. no gaze for attentional time) are skipped.
pub fn flag_declines(
    records: &[AssessmentRecord],
    criteria: &[DeclineCriterion],
    metrics: &[Metric],
) -> Result<Vec<DeclineFlag>, PsychometricsError> {
    let by_name: BTreeMap<&str, &DeclineCriterion> = criteria.iter().map(|c| (c.metric.as_str(), c)).collect();
    let resolved = metrics
        .iter()
        .map(|m| {
            by_name
                .get(m.as_str())
                .map(|c| (*m, *c))
                .ok_or_else(|| PsychometricsError::MissingCriterion(m.as_str().to_owned()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut flags = Vec::new();
    for rec in records.iter().filter(|r| r.stage.is_ride()) {
        for &(metric, crit) in &resolved {
            if let Some(value) = rec.metric(metric) {
                flags.push(DeclineFlag {
                    participant: rec.participant.clone(),
                    stage: rec.stage,
                    metric,
                    value,
                    threshold: crit.threshold,
                    declined: crit.is_declined(value),
                });
            }
        }
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_sd_thresholds() {
        let c = DeclineCriterion::from_moments("crt_rt", Direction::HigherIsWorse, 500.0, 50.0);
        assert_eq!(c.threshold, 600.0);
        assert!(c.is_declined(620.0));
        assert!(!c.is_declined(600.0));
        let c = DeclineCriterion::from_moments("bdst", Direction::LowerIsWorse, 10.0, 2.0);
        assert_eq!(c.threshold, 6.0);
        assert!(c.is_declined(5.0));
        assert!(!c.is_declined(6.0));
    }

    #[test]
    fn criterion_from_sample() {
        let c = decline_criterion("x", &[450.0, 500.0, 550.0], Direction::HigherIsWorse).unwrap();
        assert_eq!((c.baseline_mean, c.baseline_sd, c.threshold), (500.0, 50.0, 600.0));
        assert_eq!(
            decline_criterion("x", &[3.0; 5], Direction::LowerIsWorse),
            Err(PsychometricsError::DegenerateBaseline)
        );
    }

    proptest! {
        #[test]
        fn flags_are_monotone(mean in -1e3f64..1e3, sd in 0.01f64..100.0, v in -2e3f64..2e3, d in 0.0f64..1e3, lower in any::<bool>()) {
            let dir = if lower { Direction::LowerIsWorse } else { Direction::HigherIsWorse };
            let c = DeclineCriterion::from_moments("m", dir, mean, sd);
            let worse = if lower { v - d } else { v + d };
            if c.is_declined(v) {
                prop_assert!(c.is_declined(worse));
            }
        }
    }
}
