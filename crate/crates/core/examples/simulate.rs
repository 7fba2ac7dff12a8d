//! Writes a synthetic cohort to a directory, ready for `csqvr analyze`.
//!
//! cargo run --example simulate -- out/sim 42

use std::path::PathBuf;

use csqvr::simulate::{simulate_cohort, write_simulation, SimConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "sim".into()));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let sim = simulate_cohort(&SimConfig::with_seed(seed)).expect("default config is valid");
    write_simulation(&dir, &sim).expect("output directory is writable");
    let d = &sim.dataset;
    println!(
        "{}: {} participants, {} responses, {} trials, {} gaze samples, {} injected declines",
        dir.display(),
        d.participants.len(),
        d.responses.len(),
        d.trials.len(),
        d.gaze.len(),
        sim.ground_truth.iter().filter(|g| g.decline_injected).count()
    );
}
