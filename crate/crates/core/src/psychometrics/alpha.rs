use serde::{Deserialize, Serialize};

use super::{check_finite, sample_variance, PsychometricsError};

/// Mean that is exact when every value is the same.
fn anchored_mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut first = None;
    let (mut sum, mut n) = (0.0, 0.0);
    for v in values {
        let f = *first.get_or_insert(v);
        sum += v - f;
        n += 1.0;
    }
    first.map_or(f64::NAN, |f| f + sum / n)
}

/// Cronbach's α for an `n_subjects × k_items` matrix given as rows.
///
/// α = k/(k−1) · (1 − Σ var(item) / var(row total)), with n−1 variances.
/// Evaluated as k / (k − 1 + v̄/c̄) from the mean item variance v̄ and mean
/// inter-item covariance c̄, which is the same quantity but comes out as
/// exactly 1 for identical items.
pub fn cronbach_alpha(rows: &[Vec<f64>]) -> Result<f64, PsychometricsError> {
    let k = rows.first().map_or(0, Vec::len);
    if k < 2 {
        return Err(PsychometricsError::TooFewItems { needed: 2, actual: k });
    }
    if rows.len() < 3 {
        return Err(PsychometricsError::TooFewObservations { needed: 3, actual: rows.len() });
    }
    if rows.iter().any(|r| r.len() != k) {
        return Err(PsychometricsError::RaggedMatrix);
    }
    for r in rows {
        check_finite(r)?;
    }
    let totals: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    let total_var = sample_variance(&totals);
    let scale = totals.iter().fold(0.0f64, |m, t| m.max(t.abs())).max(1.0);
    if total_var <= f64::EPSILON * scale * scale {
        return Err(PsychometricsError::DegenerateVariance);
    }
    let n = rows.len() as f64;
    let centred: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            rows.iter().map(|r| r[j] - m).collect()
        })
        .collect();
    let cov = |a: usize, b: usize| centred[a].iter().zip(&centred[b]).map(|(x, y)| x * y).sum::<f64>() / (n - 1.0);
    let v_bar = anchored_mean((0..k).map(|j| cov(j, j)));
    let c_bar = anchored_mean((0..k).flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b))).map(|(a, b)| cov(a, b)));
    if c_bar == 0.0 {
        return Ok(0.0);
    }
    let k = k as f64;
    Ok(k / (k - 1.0 + v_bar / c_bar))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaBand {
    Unacceptable,
    Adequate,
    Good,
    VeryGood,
    SuspectHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaInterpretation {
    pub alpha: f64,
    pub band: AlphaBand,
}

/// Bands are half-open: [0.6, 0.7) adequate, [0.7, 0.8) good, [0.8, 0.95)
/// very good; 0.95 and above is flagged as suspiciously redundant.
pub fn interpret_alpha(alpha: f64) -> AlphaInterpretation {
    let band = if alpha >= 0.95 {
        AlphaBand::SuspectHigh
    } else if alpha >= 0.8 {
        AlphaBand::VeryGood
    } else if alpha >= 0.7 {
        AlphaBand::Good
    } else if alpha >= 0.6 {
        AlphaBand::Adequate
    } else {
        AlphaBand::Unacceptable
    };
    AlphaInterpretation { alpha, band }
}
