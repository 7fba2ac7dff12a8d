//! Ordered-quantile normalisation: ranks mapped to standard normal quantiles.

use serde::{Deserialize, Serialize};

use super::{normal_quantile, StatsError};

/// Plotting position turning a (possibly averaged) rank into a probability.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlottingPosition {
    /// r / (n + 1)
    #[default]
    VanDerWaerden,
    /// (r − 0.5) / n
    Hazen,
}

impl PlottingPosition {
    pub fn probability(self, rank: f64, n: usize) -> f64 {
        let n = n as f64;
        match self {
            PlottingPosition::VanDerWaerden => rank / (n + 1.0),
            PlottingPosition::Hazen => (rank - 0.5) / n,
        }
    }
}

/// Fitted transform: distinct training values (ascending) and their normal
/// scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrqTransform {
    pub knots: Vec<f64>,
    pub images: Vec<f64>,
    pub n: usize,
    pub position: PlottingPosition,
}

pub fn orq_fit(values: &[f64], position: PlottingPosition) -> Result<OrqTransform, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFewValues { needed: 2, actual: values.len() });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(i));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut knots = Vec::new();
    let mut images = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        // tied block occupies ranks i+1 ..= j
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        knots.push(sorted[i]);
        images.push(normal_quantile(position.probability(avg_rank, n)));
        i = j;
    }
    if knots.len() < 2 {
        return Err(StatsError::AllValuesIdentical);
    }
    Ok(OrqTransform { knots, images, n, position })
}

impl OrqTransform {
    /// Training values map to their normal scores; other values interpolate
    /// linearly between neighbouring knots and clamp beyond the extremes.
    pub fn apply(&self, x: f64) -> f64 {
        let last = self.knots.len() - 1;
        if x.is_nan() {
            return f64::NAN;
        }
        if x <= self.knots[0] {
            return self.images[0];
        }
        if x >= self.knots[last] {
            return self.images[last];
        }
        match self.knots.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => self.images[i],
            Err(i) => {
                let (x0, x1) = (self.knots[i - 1], self.knots[i]);
                let (y0, y1) = (self.images[i - 1], self.images[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn apply_all(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.apply(x)).collect()
    }
}

/// Fits on `values` and returns their transformed images in input order.
pub fn orq_normalize(values: &[f64], position: PlottingPosition) -> Result<Vec<f64>, StatsError> {
    let t = orq_fit(values, position)?;
    Ok(t.apply_all(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_values_hit_quartiles() {
        let z = orq_normalize(&[10.0, -3.0, 4.0], PlottingPosition::VanDerWaerden).unwrap();
        assert!((z[1] + 0.6745).abs() < 1e-4);
        assert!(z[2].abs() < 1e-12);
        assert!((z[0] - 0.6745).abs() < 1e-4);
    }

    #[test]
    fn ties_share_the_average_rank() {
        let t = orq_fit(&[1.0, 2.0, 2.0, 3.0], PlottingPosition::VanDerWaerden).unwrap();
        assert_eq!(t.knots, vec![1.0, 2.0, 3.0]);
        // ranks 2 and 3 average to 2.5 → Φ⁻¹(0.5) = 0
        assert!(t.apply(2.0).abs() < 1e-12);
        assert!((t.apply(1.0) - normal_quantile(0.2)).abs() < 1e-12);
    }

    #[test]
    fn unseen_values_interpolate_and_clamp() {
        let t = orq_fit(&[0.0, 1.0, 2.0], PlottingPosition::VanDerWaerden).unwrap();
        assert!((t.apply(0.5) - t.images[0] / 2.0).abs() < 1e-12);
        assert_eq!(t.apply(-10.0), t.images[0]);
        assert_eq!(t.apply(99.0), t.images[2]);
    }

    #[test]
    fn hazen_position() {
        let t = orq_fit(&[1.0, 2.0], PlottingPosition::Hazen).unwrap();
        assert!((t.images[0] - normal_quantile(0.25)).abs() < 1e-12);
    }

    #[test]
    fn identical_values_rejected() {
        assert_eq!(orq_fit(&[3.0; 4], PlottingPosition::default()), Err(StatsError::AllValuesIdentical));
        assert!(orq_fit(&[3.0], PlottingPosition::default()).is_err());
    }

    proptest! {
        #[test]
        fn apply_is_monotone(
            train in proptest::collection::vec(-100.0f64..100.0, 2..60),
            mut probes in proptest::collection::vec(-150.0f64..150.0, 2..60)
        ) {
            let Ok(t) = orq_fit(&train, PlottingPosition::VanDerWaerden) else { return Ok(()) };
            probes.sort_by(f64::total_cmp);
            let out = t.apply_all(&probes);
            prop_assert!(out.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn distinct_training_values_strictly_increase(mut train in proptest::collection::btree_set(-10_000i32..10_000, 2..80)) {
            let xs: Vec<f64> = std::mem::take(&mut train).into_iter().map(f64::from).collect();
            let z = orq_normalize(&xs, PlottingPosition::VanDerWaerden).unwrap();
            prop_assert!(z.windows(2).all(|w| w[0] < w[1]));
            prop_assert!((z.iter().sum::<f64>() / z.len() as f64).abs() < 1e-8);
        }
    }
}
