//! Ordered-quantile normalisation of a skewed sample, including values
//! outside the fitted range.

use csqvr::stats::{orq_fit, PlottingPosition};

fn main() {
    let totals = [6.0, 7.0, 7.0, 8.0, 9.0, 12.0, 15.0, 21.0, 30.0, 41.0];
    for pos in [PlottingPosition::VanDerWaerden, PlottingPosition::Hazen] {
        let t = orq_fit(&totals, pos).expect("finite sample");
        let z: Vec<String> = t.apply_all(&totals).iter().map(|z| format!("{z:.3}")).collect();
        println!("{pos:?}: {}", z.join(" "));
        println!("  unseen 10 -> {:.3}, beyond range 50 -> {:.3}", t.apply(10.0), t.apply(50.0));
    }
}
