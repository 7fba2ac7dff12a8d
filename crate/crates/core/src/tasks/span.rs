//! Adaptive backward span tasks: digit span (verbal) and Corsi blocks
//! (visuospatial).
//!
//! Both tasks share one state machine. Two trials are given at each sequence
//! length; the length grows by one when at least one of the pair is recalled
//! correctly and the task ends after two failures at the same length or after
//! the second trial at the maximum length. The score is the longest correctly
//! recalled length plus the number of correct trials.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TaskError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpanTaskKind {
    #[serde(rename = "BDST")]
    Bdst,
    #[serde(rename = "BCBT")]
    Bcbt,
}

impl SpanTaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpanTaskKind::Bdst => "BDST",
            SpanTaskKind::Bcbt => "BCBT",
        }
    }
}

pub const MAX_SPAN_LENGTH: u8 = 7;
pub const TRIALS_PER_LENGTH: u8 = 2;
/// Boxes displayed per Corsi trial.
pub const CORSI_VISIBLE_BOXES: usize = 9;
/// Positions in the 3×3×3 Corsi lattice.
pub const CORSI_LATTICE_SIZE: usize = 27;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanTaskConfig {
    pub kind: SpanTaskKind,
    pub start_length: u8,
}

impl SpanTaskConfig {
    pub fn new(kind: SpanTaskKind, start_length: u8) -> Result<Self, TaskError> {
        if !(2..=MAX_SPAN_LENGTH).contains(&start_length) {
            return Err(TaskError::InvalidStartLength(start_length));
        }
        Ok(Self { kind, start_length })
    }

    /// Digit span starts at three digits.
    pub fn bdst() -> Self {
        Self { kind: SpanTaskKind::Bdst, start_length: 3 }
    }

    /// Corsi blocks start at two boxes.
    pub fn bcbt() -> Self {
        Self { kind: SpanTaskKind::Bcbt, start_length: 2 }
    }

    pub fn default_for(kind: SpanTaskKind) -> Self {
        match kind {
            SpanTaskKind::Bdst => Self::bdst(),
            SpanTaskKind::Bcbt => Self::bcbt(),
        }
    }

    /// Upper bound on the number of trials a run can take.
    pub fn max_trials(&self) -> usize {
        usize::from(TRIALS_PER_LENGTH) * usize::from(MAX_SPAN_LENGTH - self.start_length + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanTaskState {
    pub config: SpanTaskConfig,
    pub current_length: u8,
    /// 1 or 2.
    pub trial_in_length: u8,
    pub correct_count: u32,
    pub best_span: u8,
    pub failures_in_length: u8,
    pub trials_done: u32,
    pub finished: bool,
}

/// What [`SpanTaskState::advance`] decided after recording an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanDecision {
    pub finished: bool,
    pub next_length: Option<u8>,
}

impl SpanTaskState {
    pub fn new(config: SpanTaskConfig) -> Self {
        Self {
            config,
            current_length: config.start_length,
            trial_in_length: 1,
            correct_count: 0,
            best_span: 0,
            failures_in_length: 0,
            trials_done: 0,
            finished: false,
        }
    }

    /// Stimulus for the upcoming trial. Digit span draws digits 0..=9 with no
    /// digit repeating its predecessor; Corsi draws distinct indices among the
    /// nine displayed boxes.
    pub fn next_sequence<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<u8>, TaskError> {
        if self.finished {
            return Err(TaskError::TaskFinished);
        }
        let len = usize::from(self.current_length);
        Ok(match self.config.kind {
            SpanTaskKind::Bdst => {
                let mut seq: Vec<u8> = Vec::with_capacity(len);
                while seq.len() < len {
                    let d = rng.random_range(0..10u8);
                    if seq.last() != Some(&d) {
                        seq.push(d);
                    }
                }
                seq
            }
            SpanTaskKind::Bcbt => index::sample(rng, CORSI_VISIBLE_BOXES, len)
                .into_iter()
                .map(|i| i as u8)
                .collect(),
        })
    }

    pub fn advance(&mut self, trial_correct: bool) -> Result<SpanDecision, TaskError> {
        if self.finished {
            return Err(TaskError::TaskFinished);
        }
        self.trials_done += 1;
        if trial_correct {
            self.correct_count += 1;
            self.best_span = self.best_span.max(self.current_length);
        } else {
            self.failures_in_length += 1;
        }
        if self.trial_in_length < TRIALS_PER_LENGTH {
            self.trial_in_length += 1;
        } else if self.failures_in_length >= TRIALS_PER_LENGTH
            || self.current_length >= MAX_SPAN_LENGTH
        {
            self.finished = true;
        } else {
            self.current_length += 1;
            self.trial_in_length = 1;
            self.failures_in_length = 0;
        }
        Ok(SpanDecision {
            finished: self.finished,
            next_length: (!self.finished).then_some(self.current_length),
        })
    }

    pub fn score(&self) -> Result<u32, TaskError> {
        if !self.finished {
            return Err(TaskError::TaskNotFinished);
        }
        Ok(u32::from(self.best_span) + self.correct_count)
    }

    /// Replays a full outcome sequence; errors if outcomes continue past the end.
    pub fn replay(config: SpanTaskConfig, outcomes: &[bool]) -> Result<Self, TaskError> {
        let mut state = Self::new(config);
        for &o in outcomes {
            state.advance(o)?;
        }
        Ok(state)
    }
}

/// Backward recall check: the response must be the stimulus reversed. The
/// trial ends at the first wrong entry, so a partial or over-long response is
/// a single failed trial.
pub fn recall_is_correct(stimulus: &[u8], response: &[u8]) -> bool {
    stimulus.len() == response.len() && stimulus.iter().rev().eq(response.iter())
}

/// Nine distinct positions of the 27-position Corsi lattice, drawn uniformly
/// without replacement. Positions are `(x, y, z)` with coordinates in 0..3.
pub fn corsi_sample_layout<R: Rng + ?Sized>(rng: &mut R) -> Vec<[u8; 3]> {
    let mut picks: Vec<usize> = index::sample(rng, CORSI_LATTICE_SIZE, CORSI_VISIBLE_BOXES).into_vec();
    picks.sort_unstable();
    picks
        .into_iter()
        .map(|i| [(i % 3) as u8, ((i / 3) % 3) as u8, (i / 9) as u8])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bcbt() -> SpanTaskState {
        SpanTaskState::new(SpanTaskConfig::bcbt())
    }

    /// Independent replay: walks the outcome list length by length.
    fn oracle_score(start: u8, outcomes: &[bool]) -> (u32, usize) {
        let mut best = 0u8;
        let mut correct = 0u32;
        let mut used = 0;
        for len in start..=MAX_SPAN_LENGTH {
            let pair: Vec<bool> = outcomes.iter().skip(used).take(2).copied().collect();
            if pair.len() < 2 {
                break;
            }
            used += 2;
            let c = pair.iter().filter(|&&b| b).count() as u32;
            correct += c;
            if c > 0 {
                best = len;
            } else {
                break;
            }
        }
        (u32::from(best) + correct, used)
    }

    #[test]
    fn two_failures_at_start_end_the_task() {
        let mut s = bcbt();
        s.advance(false).unwrap();
        let d = s.advance(false).unwrap();
        assert!(d.finished);
        assert_eq!((s.best_span, s.correct_count), (0, 0));
        assert_eq!(s.score(), Ok(0));
    }

    #[test]
    fn one_success_in_pair_advances() {
        let mut s = bcbt();
        s.advance(false).unwrap();
        let d = s.advance(true).unwrap();
        assert_eq!(d, SpanDecision { finished: false, next_length: Some(3) });
        assert_eq!(s.current_length, 3);
        assert_eq!(s.failures_in_length, 0);
    }

    #[test]
    fn scripted_run_scores_seven() {
        let s = SpanTaskState::replay(SpanTaskConfig::bcbt(), &[true, true, true, true, false, false]).unwrap();
        assert!(s.finished);
        assert_eq!((s.best_span, s.correct_count), (3, 4));
        assert_eq!(s.score(), Ok(7));
    }

    #[test]
    fn perfect_corsi_run_scores_nineteen() {
        let s = SpanTaskState::replay(SpanTaskConfig::bcbt(), &[true; 12]).unwrap();
        assert!(s.finished);
        assert_eq!(s.score(), Ok(19));
    }

    #[test]
    fn advancing_after_finish_is_rejected() {
        let mut s = SpanTaskState::replay(SpanTaskConfig::bdst(), &[false, false]).unwrap();
        assert_eq!(s.advance(true), Err(TaskError::TaskFinished));
        assert_eq!(s.next_sequence(&mut ChaCha8Rng::seed_from_u64(1)), Err(TaskError::TaskFinished));
    }

    #[test]
    fn unfinished_task_has_no_score() {
        assert_eq!(bcbt().score(), Err(TaskError::TaskNotFinished));
    }

    #[test]
    fn start_length_is_bounded() {
        assert!(SpanTaskConfig::new(SpanTaskKind::Bdst, 1).is_err());
        assert!(SpanTaskConfig::new(SpanTaskKind::Bdst, 8).is_err());
        assert!(SpanTaskConfig::new(SpanTaskKind::Bdst, 7).is_ok());
    }

    #[test]
    fn sequences_follow_the_length_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = bcbt();
        let seq = s.next_sequence(&mut rng).unwrap();
        assert_eq!(seq.len(), 2);
        assert_ne!(seq[0], seq[1]);

        s = SpanTaskState::new(SpanTaskConfig::bdst());
        s.current_length = 7;
        let digits = s.next_sequence(&mut rng).unwrap();
        assert_eq!(digits.len(), 7);
        assert!(digits.iter().all(|&d| d < 10));
        assert!(digits.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn sequences_are_deterministic_per_seed() {
        let s = SpanTaskState::new(SpanTaskConfig::bdst());
        let a = s.next_sequence(&mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = s.next_sequence(&mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn backward_recall() {
        assert!(recall_is_correct(&[2, 4, 3], &[3, 4, 2]));
        assert!(!recall_is_correct(&[2, 4, 3], &[2, 4, 3]));
        assert!(!recall_is_correct(&[2, 4, 3], &[3, 4]));
    }

    #[test]
    fn corsi_layouts() {
        let a = corsi_sample_layout(&mut ChaCha8Rng::seed_from_u64(3));
        let b = corsi_sample_layout(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        let mut distinct = std::collections::HashSet::new();
        for seed in 0..100 {
            let l = corsi_sample_layout(&mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(l.len(), 9);
            let set: std::collections::HashSet<_> = l.iter().collect();
            assert_eq!(set.len(), 9);
            assert!(l.iter().all(|p| p.iter().all(|&c| c < 3)));
            distinct.insert(l);
        }
        assert!(distinct.len() >= 99);
    }

    proptest! {
        #[test]
        fn runs_terminate_within_bound_and_match_oracle(
            start in 2u8..=7,
            outcomes in proptest::collection::vec(any::<bool>(), 14)
        ) {
            let config = SpanTaskConfig::new(SpanTaskKind::Bcbt, start).unwrap();
            let mut s = SpanTaskState::new(config);
            let mut used = 0;
            for &o in &outcomes {
                if s.finished { break; }
                s.advance(o).unwrap();
                used += 1;
            }
            prop_assert!(s.finished);
            prop_assert!(used <= config.max_trials());
            prop_assert!(s.best_span <= s.current_length);
            let (expected, oracle_used) = oracle_score(start, &outcomes);
            prop_assert_eq!(used, oracle_used);
            prop_assert_eq!(s.score().unwrap(), expected);
        }
    }
}
