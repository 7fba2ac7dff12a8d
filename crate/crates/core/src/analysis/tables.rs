//! CSV renderings of report sections. Undefined cells are left empty and the
//! `status`/`reason` columns say why.

use super::{AnalysisReport, Outcome};
use crate::io::assessments_to_csv;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn status<T>(o: &Outcome<T>) -> [String; 2] {
    match o {
        Outcome::Ok { .. } => ["ok".to_owned(), String::new()],
        Outcome::NotComputable { reason } => ["not_computable".to_owned(), reason.clone()],
    }
}

fn render(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn reliability_csv(report: &AnalysisReport) -> Vec<u8> {
    let mut rows = Vec::new();
    for s in &report.reliability {
        match &s.outcome {
            Outcome::Ok { value } => {
                for r in value {
                    rows.push(vec![
                        s.instrument.to_string(),
                        s.timepoints.clone(),
                        r.score.clone(),
                        r.alpha.to_string(),
                        serde_json::to_value(r.band).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
                        r.n.to_string(),
                        r.k.to_string(),
                        "ok".to_owned(),
                        String::new(),
                    ]);
                }
            }
            Outcome::NotComputable { reason } => rows.push(vec![
                s.instrument.to_string(),
                s.timepoints.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "not_computable".to_owned(),
                reason.clone(),
            ]),
        }
    }
    render(&["instrument", "timepoints", "score", "alpha", "band", "n", "k", "status", "reason"], rows)
}

pub fn correlations_csv(report: &AnalysisReport) -> Vec<u8> {
    let rows = report
        .correlations
        .iter()
        .map(|c| {
            let v = c.outcome.value();
            let mut row = vec![
                c.left_instrument.to_string(),
                c.left_score.clone(),
                c.right_instrument.to_string(),
                c.right_score.clone(),
                opt(v.map(|v| v.r)),
                opt(v.map(|v| v.p)),
                v.map(|v| v.n.to_string()).unwrap_or_default(),
            ];
            row.extend(status(&c.outcome));
            row
        })
        .collect();
    render(&["left_instrument", "left_score", "right_instrument", "right_score", "r", "p", "n", "status", "reason"], rows)
}

pub fn criteria_csv(report: &AnalysisReport) -> Vec<u8> {
    let rows = report
        .declines
        .criteria
        .iter()
        .map(|c| {
            let v = c.outcome.value();
            let mut row = vec![
                c.metric.to_string(),
                opt(v.map(|v| v.baseline_mean)),
                opt(v.map(|v| v.baseline_sd)),
                opt(v.map(|v| v.threshold)),
                report.declines.declined_counts.get(&c.metric).map(|n| n.to_string()).unwrap_or_default(),
            ];
            row.extend(status(&c.outcome));
            row
        })
        .collect();
    render(&["metric", "baseline_mean", "baseline_sd", "threshold", "declined", "status", "reason"], rows)
}

pub fn declines_csv(report: &AnalysisReport) -> Vec<u8> {
    let rows = report
        .declines
        .flags
        .iter()
        .map(|f| {
            vec![
                f.participant.to_string(),
                f.stage.to_string(),
                f.metric.to_string(),
                f.value.to_string(),
                f.threshold.to_string(),
                if f.declined { "1" } else { "0" }.to_owned(),
            ]
        })
        .collect();
    render(&["participant", "stage", "metric", "value", "threshold", "declined"], rows)
}

pub fn roc_csv(report: &AnalysisReport) -> Vec<u8> {
    let rows = report
        .roc
        .iter()
        .map(|r| {
            let v = r.outcome.value();
            let mut row = vec![
                r.target.to_string(),
                r.instrument.to_string(),
                r.score.clone(),
                r.positives.to_string(),
                r.negatives.to_string(),
                opt(v.map(|v| v.cutoff)),
                opt(v.map(|v| v.sensitivity)),
                opt(v.map(|v| v.specificity)),
                opt(v.and_then(|v| v.ppv)),
                opt(v.and_then(|v| v.npv)),
                opt(v.map(|v| v.auc)),
                opt(v.map(|v| v.metric_score)),
                v.map(|v| if v.suitable { "1" } else { "0" }.to_owned()).unwrap_or_default(),
            ];
            row.extend(status(&r.outcome));
            row
        })
        .collect();
    render(
        &[
            "target", "instrument", "score", "positives", "negatives", "cutoff", "sensitivity", "specificity", "ppv",
            "npv", "auc", "metric_score", "suitable", "status", "reason",
        ],
        rows,
    )
}

pub fn lmm_csv(report: &AnalysisReport) -> Vec<u8> {
    let l = &report.lmm;
    let v = l.outcome.value();
    let mut row = vec![
        l.outcome_variable.clone(),
        l.predictor.clone(),
        if l.transformed { "1" } else { "0" }.to_owned(),
        opt(v.map(|v| v.beta0)),
        opt(v.map(|v| v.beta1)),
        opt(v.map(|v| v.var_group)),
        opt(v.map(|v| v.var_resid)),
        opt(v.map(|v| v.r2_marginal)),
        opt(v.map(|v| v.r2_conditional)),
        opt(v.map(|v| v.log_likelihood)),
        v.map(|v| v.n_obs.to_string()).unwrap_or_default(),
        v.map(|v| v.n_groups.to_string()).unwrap_or_default(),
    ];
    row.extend(status(&l.outcome));
    render(
        &[
            "outcome", "predictor", "transformed", "beta0", "beta1", "var_group", "var_resid", "r2_marginal",
            "r2_conditional", "log_likelihood", "n_obs", "n_groups", "status", "reason",
        ],
        vec![row],
    )
}

pub fn stage_means_csv(report: &AnalysisReport) -> Vec<u8> {
    let rows = report
        .stage_means
        .iter()
        .map(|s| vec![s.stage.to_string(), s.n.to_string(), s.csqvr_total.to_string(), s.crt_rt.to_string(), opt(s.pupil)])
        .collect();
    render(&["stage", "n", "csqvr_total", "crt_rt", "pupil"], rows)
}

/// Every table as (file name, bytes).
pub fn all_tables(report: &AnalysisReport) -> Vec<(&'static str, Vec<u8>)> {
    vec![
        ("assessments.csv", assessments_to_csv(&report.assessments)),
        ("stage_means.csv", stage_means_csv(report)),
        ("reliability.csv", reliability_csv(report)),
        ("correlations.csv", correlations_csv(report)),
        ("decline_criteria.csv", criteria_csv(report)),
        ("declines.csv", declines_csv(report)),
        ("roc.csv", roc_csv(report)),
        ("lmm.csv", lmm_csv(report)),
    ]
}
