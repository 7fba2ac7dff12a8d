//! Simulates cohorts over several seeds and prints the headline verdicts.
//!
//! cargo run --release --example end_to_end -- 20

use csqvr::analysis::{analyze, AnalysisConfig};
use csqvr::psychometrics::optimal_cutoff;
use csqvr::simulate::{simulate_cohort, SimConfig};
use csqvr::{Instrument, Metric};

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    println!("seed  auc_rt  metric_rt  suitable  auc_truth  beta1   r2c   means");
    for seed in 0..seeds {
        let sim = simulate_cohort(&SimConfig::with_seed(seed)).expect("default config is valid");
        let report = analyze(&sim.dataset, &AnalysisConfig { seed: Some(seed), ..Default::default() }, vec![]);
        let row = report.roc_row(Metric::CrtRt, Instrument::CsqvrVr, "total").and_then(|r| r.outcome.value());
        // the same score against the injected labels
        let truth: Vec<(f64, bool)> = sim
            .ground_truth
            .iter()
            .filter(|g| g.stage.is_ride())
            .filter_map(|g| {
                let rec = report.assessments.iter().find(|r| r.participant == g.participant && r.stage == g.stage)?;
                Some((rec.csqvr_vr.total, g.decline_injected))
            })
            .collect();
        let (xs, ys): (Vec<f64>, Vec<bool>) = truth.into_iter().unzip();
        let vs_truth = optimal_cutoff(&xs, &ys).ok();
        let fit = report.lmm.outcome.value();
        let means: Vec<String> = report.stage_means.iter().map(|m| format!("{:.1}", m.csqvr_total)).collect();
        println!(
            "{seed:>4}  {:>6.3}  {:>9.3}  {:>8}  {:>9.3}  {:>6.3}  {:>4.2}  {}",
            row.map_or(f64::NAN, |r| r.auc),
            row.map_or(f64::NAN, |r| r.metric_score),
            row.is_some_and(|r| r.suitable),
            vs_truth.as_ref().map_or(f64::NAN, |r| r.auc),
            fit.map_or(f64::NAN, |f| f.beta1),
            fit.map_or(f64::NAN, |f| f.r2_conditional),
            means.join(" "),
        );
    }
}
