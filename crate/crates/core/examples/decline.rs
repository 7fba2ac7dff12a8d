//! Two-SD decline criteria from baseline and the cells they flag.

use csqvr::analysis::assemble_records;
use csqvr::psychometrics::{decline_criterion, flag_declines};
use csqvr::simulate::{simulate_cohort, SimConfig};
use csqvr::{Metric, Stage};

fn main() {
    let sim = simulate_cohort(&SimConfig::with_seed(2)).expect("default config is valid");
    let (records, _) = assemble_records(&sim.dataset);
    let metrics = Metric::ALL.to_vec();
    let criteria: Vec<_> = metrics
        .iter()
        .map(|&m| {
            let base: Vec<f64> = records.iter().filter(|r| r.stage == Stage::Baseline).filter_map(|r| r.metric(m)).collect();
            decline_criterion(m.as_str(), &base, m.direction()).expect("baseline varies")
        })
        .collect();
    for c in &criteria {
        println!("{:<8} mean {:>8.2} sd {:>7.2} threshold {:>8.2}", c.metric, c.baseline_mean, c.baseline_sd, c.threshold);
    }
    let flags = flag_declines(&records, &criteria, &metrics).expect("criteria cover metrics");
    for f in flags.iter().filter(|f| f.declined) {
        println!("{} {} {} {:.1} beyond {:.1}", f.participant, f.stage, f.metric, f.value, f.threshold);
    }
    let injected = sim.ground_truth.iter().filter(|g| g.decline_injected).count();
    println!("{} flagged cells; {injected} declines injected by the simulator", flags.iter().filter(|f| f.declined).count());
}
