//! ROC analysis with "positive iff score ≥ cut-off" semantics.

use serde::{Deserialize, Serialize};

use super::{check_finite, PsychometricsError};

pub const AUC_THRESHOLD: f64 = 0.70;
pub const METRIC_SCORE_THRESHOLD: f64 = 1.5;

/// Both suitability criteria must hold, strictly.
pub fn is_suitable(auc: f64, metric_score: f64) -> bool {
    auc > AUC_THRESHOLD && metric_score > METRIC_SCORE_THRESHOLD
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u32,
    pub fp: u32,
    pub tn: u32,
    #[serde(rename = "fn")]
    pub fn_: u32,
}

impl Confusion {
    pub fn positives(&self) -> u32 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u32 {
        self.tn + self.fp
    }

    pub fn sensitivity(&self) -> f64 {
        f64::from(self.tp) / f64::from(self.positives())
    }

    pub fn specificity(&self) -> f64 {
        f64::from(self.tn) / f64::from(self.negatives())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocResult {
    pub cutoff: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    /// Absent when nothing is classified positive.
    pub ppv: Option<f64>,
    /// Absent when nothing is classified negative.
    pub npv: Option<f64>,
    pub auc: f64,
    /// Sensitivity plus specificity.
    pub metric_score: f64,
    pub suitable: bool,
    pub confusion: Confusion,
}

impl RocResult {
    pub fn from_confusion(cutoff: f64, confusion: Confusion, auc: f64) -> Self {
        let ratio = |num: u32, den: u32| (den > 0).then(|| f64::from(num) / f64::from(den));
        let sensitivity = confusion.sensitivity();
        let specificity = confusion.specificity();
        let metric_score = sensitivity + specificity;
        Self {
            cutoff,
            sensitivity,
            specificity,
            ppv: ratio(confusion.tp, confusion.tp + confusion.fp),
            npv: ratio(confusion.tn, confusion.tn + confusion.fn_),
            auc,
            metric_score,
            suitable: is_suitable(auc, metric_score),
            confusion,
        }
    }
}

fn check_inputs(scores: &[f64], labels: &[bool]) -> Result<(u32, u32), PsychometricsError> {
    if scores.len() != labels.len() {
        return Err(PsychometricsError::LengthMismatch { left: scores.len(), right: labels.len() });
    }
    check_finite(scores)?;
    let pos = labels.iter().filter(|&&l| l).count() as u32;
    let neg = labels.len() as u32 - pos;
    if pos == 0 || neg == 0 {
        return Err(PsychometricsError::SingleClass);
    }
    Ok((pos, neg))
}

/// Scores sorted ascending with their labels.
fn sorted_pairs(scores: &[f64], labels: &[bool]) -> Vec<(f64, bool)> {
    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// AUC = P(score⁺ > score⁻) + ½·P(tie), via the Mann–Whitney rank sum with
/// mid-ranks for ties.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, PsychometricsError> {
    let (pos, neg) = check_inputs(scores, labels)?;
    let pairs = sorted_pairs(scores, labels);
    // doubled ranks keep tie mid-ranks integral
    let mut rank2_sum_pos: u64 = 0;
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        let mid2 = (i + 1 + j) as u64;
        let pos_in_block = pairs[i..j].iter().filter(|p| p.1).count() as u64;
        rank2_sum_pos += mid2 * pos_in_block;
        i = j;
    }
    let (p, n) = (u64::from(pos), u64::from(neg));
    let u2 = rank2_sum_pos - p * (p + 1);
    Ok(u2 as f64 / (2 * p * n) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Cut-off producing this point; infinite for the (0, 0) corner.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC polygon from (0, 0) to (1, 1), one vertex per distinct score value,
/// thresholds descending.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<RocPoint>, PsychometricsError> {
    let (pos, neg) = check_inputs(scores, labels)?;
    let pairs = sorted_pairs(scores, labels);
    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0u32, 0u32);
    let mut i = pairs.len();
    while i > 0 {
        let v = pairs[i - 1].0;
        while i > 0 && pairs[i - 1].0 == v {
            if pairs[i - 1].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i -= 1;
        }
        points.push(RocPoint {
            threshold: v,
            fpr: f64::from(fp) / f64::from(neg),
            tpr: f64::from(tp) / f64::from(pos),
        });
    }
    Ok(points)
}

pub fn trapezoid_auc(curve: &[RocPoint]) -> f64 {
    curve
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

pub fn confusion_at(scores: &[f64], labels: &[bool], cutoff: f64) -> Confusion {
    let mut c = Confusion { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= cutoff, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// Picks the observed score value maximising sensitivity + specificity.
/// Ties go to higher sensitivity, then to the lower cut-off.
pub fn optimal_cutoff(scores: &[f64], labels: &[bool]) -> Result<RocResult, PsychometricsError> {
    let (pos, neg) = check_inputs(scores, labels)?;
    let auc = roc_auc(scores, labels)?;
    let pairs = sorted_pairs(scores, labels);
    // Sweep cut-offs ascending; before block k everything at index ≥ start is positive.
    let mut tp = pos;
    let mut fp = neg;
    let mut best: Option<(u64, u32, f64, Confusion)> = None;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        let confusion = Confusion { tp, fp, tn: neg - fp, fn_: pos - tp };
        // sens + spec scaled by pos·neg stays integral
        let j = u64::from(tp) * u64::from(neg) + u64::from(neg - fp) * u64::from(pos);
        let better = match best {
            None => true,
            Some((bj, btp, _, _)) => j > bj || (j == bj && tp > btp),
        };
        if better {
            best = Some((j, tp, v, confusion));
        }
        while i < pairs.len() && pairs[i].0 == v {
            if pairs[i].1 {
                tp -= 1;
            } else {
                fp -= 1;
            }
            i += 1;
        }
    }
    let (_, _, cutoff, confusion) = best.expect("non-empty input");
    Ok(RocResult::from_confusion(cutoff, confusion, auc))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ASC: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&ASC, &[false, false, true, true]), Ok(1.0));
        assert_eq!(roc_auc(&ASC, &[true, true, false, false]), Ok(0.0));
        assert_eq!(roc_auc(&ASC, &[false, true, false, true]), Ok(0.75));
        assert_eq!(roc_auc(&[1.0, 1.0], &[false, true]), Ok(0.5));
    }

    #[test]
    fn single_class_is_rejected() {
        assert_eq!(roc_auc(&ASC, &[true; 4]), Err(PsychometricsError::SingleClass));
        assert_eq!(optimal_cutoff(&ASC, &[false; 4]).unwrap_err(), PsychometricsError::SingleClass);
    }

    #[test]
    fn curve_matches_rank_auc_on_ties() {
        let s = [1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 5.0];
        let l = [false, true, false, true, false, false, true];
        let curve = roc_curve(&s, &l).unwrap();
        assert_eq!(curve.first().map(|p| (p.fpr, p.tpr)), Some((0.0, 0.0)));
        assert_eq!(curve.last().map(|p| (p.fpr, p.tpr)), Some((1.0, 1.0)));
        assert!((trapezoid_auc(&curve) - roc_auc(&s, &l).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn engineered_table_five_shape() {
        // positives 10, 12; negatives 6,6,7,7,8,8,11,13
        let s = [10.0, 12.0, 6.0, 6.0, 7.0, 7.0, 8.0, 8.0, 11.0, 13.0];
        let l = [true, true, false, false, false, false, false, false, false, false];
        let r = optimal_cutoff(&s, &l).unwrap();
        assert_eq!(r.cutoff, 10.0);
        assert_eq!((r.sensitivity, r.specificity, r.metric_score), (1.0, 0.75, 1.75));
        assert_eq!(r.auc, 13.0 / 16.0);
        assert!(r.suitable);
        assert_eq!(r.ppv, Some(0.5));
        assert_eq!(r.npv, Some(1.0));
    }

    #[test]
    fn perfect_separation() {
        let r = optimal_cutoff(&ASC, &[false, false, true, true]).unwrap();
        assert_eq!((r.cutoff, r.sensitivity, r.specificity, r.metric_score), (3.0, 1.0, 1.0, 2.0));
    }

    #[test]
    fn metric_score_not_suitable_below_threshold() {
        // 4/5 sensitive, 77/112 specific, AUC 0.661
        let c = Confusion { tp: 4, fn_: 1, tn: 77, fp: 35 };
        let r = RocResult::from_confusion(83.36, c, 0.661);
        assert_eq!(r.specificity, 0.6875);
        assert!((r.metric_score - 1.4875).abs() < 1e-15);
        assert!(!r.suitable);
    }

    #[test]
    fn npv_undefined_at_lowest_cutoff() {
        let r = RocResult::from_confusion(1.0, confusion_at(&ASC, &[false, true, false, true], 1.0), 0.75);
        assert_eq!(r.npv, None);
        assert_eq!(r.ppv, Some(0.5));
    }

    #[test]
    fn tie_prefers_higher_sensitivity_then_lower_cutoff() {
        // cut-off 2: sens 1, spec 0.5; cut-off 4: sens 0.5, spec 1; both sum to 1.5
        let s = [1.0, 2.0, 3.0, 4.0];
        let l = [false, true, false, true];
        let r = optimal_cutoff(&s, &l).unwrap();
        assert_eq!(r.cutoff, 2.0);
        assert_eq!(r.sensitivity, 1.0);
        // all-equal J and sensitivity: pick the lowest
        let r = optimal_cutoff(&[1.0, 1.0], &[true, false]).unwrap();
        assert_eq!(r.cutoff, 1.0);
    }
}
