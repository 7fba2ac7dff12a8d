//! Internal consistency of simulated post-exposure SSQ and VRSQ responses.

use csqvr::psychometrics::{reliability_report, ReliabilityScheme};
use csqvr::simulate::{simulate_cohort, SimConfig};
use csqvr::{Instrument, Timepoint};

fn main() {
    let sim = simulate_cohort(&SimConfig::with_seed(1)).expect("default config is valid");
    for inst in [Instrument::Ssq, Instrument::Vrsq, Instrument::CsqvrPaper] {
        let rows: Vec<Vec<f64>> = sim
            .dataset
            .responses
            .iter()
            .filter(|r| r.instrument == inst && r.timepoint == Timepoint::Post)
            .map(|r| r.items.iter().map(|&v| f64::from(v)).collect())
            .collect();
        for row in reliability_report(&ReliabilityScheme::for_instrument(inst), &rows).expect("enough rows") {
            println!("{:<12} {:<15} alpha {:.3} {:?} (n {}, k {})", row.instrument, row.score, row.alpha, row.band, row.n, row.k);
        }
    }
}
