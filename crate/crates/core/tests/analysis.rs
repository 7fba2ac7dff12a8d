use csqvr::analysis::{analyze, score_names, AnalysisConfig, Outcome, RocPairing};
use csqvr::io::{CohortDataset, QUESTIONNAIRE_EPISODE};
use csqvr::simulate::{simulate_cohort, SimConfig};
use csqvr::{Instrument, Metric, Stage};

fn sim(seed: u64) -> CohortDataset {
    simulate_cohort(&SimConfig::with_seed(seed)).unwrap().dataset
}

#[test]
fn report_is_deterministic_and_complete() {
    let data = sim(8);
    let cfg = AnalysisConfig { seed: Some(8), ..Default::default() };
    let a = analyze(&data, &cfg, vec![]);
    let b = analyze(&data, &cfg, vec![]);
    assert_eq!(a.to_json(), b.to_json());
    assert!(a.provenance.generated_at.is_none());
    assert!(a.not_computable().is_empty(), "{:?}", a.not_computable());
    assert_eq!(a.n_participants, 39);
    assert_eq!(a.assessments.len(), 39 * 4);
    assert!(a.cell_issues.is_empty());

    // one ROC row per target and score
    let scores: usize = Instrument::ALL.iter().filter(|i| **i != Instrument::Mssq).map(|i| score_names(*i).len()).sum();
    assert_eq!(a.roc.len(), cfg.roc_targets.len() * scores);
    for row in &a.roc {
        assert_eq!(row.pairing, RocPairing::Observation);
        assert_eq!(row.positives + row.negatives, 39 * 3, "{}/{}", row.instrument, row.score);
    }
    // instruments measure one construct, so convergent correlations are positive
    for c in &a.correlations {
        assert!(c.outcome.value().is_some_and(|v| v.r > 0.0), "{c:?}");
    }
    for r in &a.reliability {
        let rows = r.outcome.value().unwrap();
        assert!(rows.iter().all(|row| row.alpha > 0.0 && row.alpha <= 1.0), "{rows:?}");
    }
}

#[test]
fn participant_pairing_counts_people() {
    let data = sim(9);
    let cfg = AnalysisConfig { roc_pairing: RocPairing::Participant, ..Default::default() };
    let report = analyze(&data, &cfg, vec![]);
    for row in &report.roc {
        assert_eq!(row.positives + row.negatives, 39);
    }
}

/// Every ride copies the fastest baseline, so nothing can cross the 2-SD line.
#[test]
fn no_declines_make_roc_single_class() {
    let mut data = sim(10);
    let cfg = AnalysisConfig { roc_targets: vec![Metric::CrtRt], decline_metrics: vec![Metric::CrtRt], ..Default::default() };
    let base = analyze(&data, &cfg, vec![]);
    let fastest = base
        .assessments
        .iter()
        .filter(|r| r.stage == Stage::Baseline)
        .min_by(|a, b| a.crt_rt_mean.total_cmp(&b.crt_rt_mean))
        .unwrap()
        .participant
        .clone();
    let template_trials: Vec<_> =
        data.trials.iter().filter(|t| t.participant == fastest && t.stage == Stage::Baseline).cloned().collect();
    let template_gaze: Vec<_> =
        data.gaze.iter().filter(|g| g.participant == fastest && g.stage == Stage::Baseline).cloned().collect();
    data.trials.retain(|t| t.stage == Stage::Baseline);
    data.gaze.retain(|g| g.stage == Stage::Baseline || g.episode == QUESTIONNAIRE_EPISODE);
    for p in data.participant_ids() {
        for stage in [Stage::Ride1, Stage::Ride2, Stage::Ride3] {
            data.trials.extend(template_trials.iter().cloned().map(|mut t| {
                t.participant = p.clone();
                t.stage = stage;
                t
            }));
            data.gaze.extend(template_gaze.iter().filter(|g| g.episode != QUESTIONNAIRE_EPISODE).cloned().map(|mut g| {
                g.participant = p.clone();
                g.stage = stage;
                g
            }));
        }
    }
    let report = analyze(&data, &cfg, vec![]);
    assert_eq!(report.declines.declined_counts.get(&Metric::CrtRt), Some(&0));
    assert!(!report.roc.is_empty());
    for row in &report.roc {
        assert_eq!(row.positives, 0);
        match &row.outcome {
            Outcome::NotComputable { reason } => assert!(reason.contains("class"), "{reason}"),
            Outcome::Ok { .. } => panic!("{} {} should not be computable", row.instrument, row.score),
        }
    }
    let missing = report.not_computable();
    assert!(missing.iter().any(|m| m.starts_with("roc")), "{missing:?}");
}

#[test]
fn empty_dataset_is_not_computable_everywhere() {
    let report = analyze(&CohortDataset::default(), &AnalysisConfig::default(), vec![]);
    assert_eq!(report.n_participants, 0);
    assert!(!report.lmm.outcome.is_ok());
    assert!(report.declines.criteria.iter().all(|c| !c.outcome.is_ok()));
    assert!(!report.not_computable().is_empty());
}
