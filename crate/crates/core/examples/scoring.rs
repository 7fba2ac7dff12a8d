//! Scores one response per instrument, every variant.
//!
//! cargo run --example scoring

use csqvr::scoring::{score_all_variants, score_mssq};
use csqvr::Instrument;

fn main() {
    let responses = [
        (Instrument::CsqvrVr, vec![3, 2, 4, 5, 1, 2]),
        (Instrument::CsqvrPaper, vec![1, 1, 2, 1, 3, 2]),
        (Instrument::Vrsq, vec![1, 0, 2, 1, 0, 3, 1, 0, 2]),
        (Instrument::Ssq, vec![1, 0, 2, 0, 1, 0, 0, 1, 3, 0, 0, 2, 0, 1, 0, 1]),
    ];
    for (inst, items) in responses {
        for r in score_all_variants(inst, &items).expect("items are in range") {
            let subs: Vec<String> = r.subscales.iter().map(|(k, v)| format!("{k} {v:.2}")).collect();
            println!("{:<12} {:<15} total {:>7.2} / {:<7.2} {}", inst.as_str(), format!("{:?}", r.variant), r.total, r.max_total, subs.join(", "));
        }
    }
    let mssq = score_mssq(&[1; 18]).expect("items are in range");
    println!("MSSQ         child {} adult {} total {}", mssq.child, mssq.adult, mssq.total);
}
