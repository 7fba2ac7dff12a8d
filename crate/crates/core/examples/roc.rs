//! Optimal cut-off by sensitivity plus specificity, with the ROC curve.

use csqvr::psychometrics::{optimal_cutoff, roc_curve};

fn main() {
    let scores = [8.0, 12.0, 9.0, 15.0, 11.0, 20.0, 7.0, 14.0, 16.0, 10.0, 13.0, 18.0];
    let declined = [false, false, false, true, false, true, false, false, true, false, true, true];
    for p in roc_curve(&scores, &declined).expect("both classes present") {
        println!("score >= {:>4}  fpr {:.3}  tpr {:.3}", p.threshold, p.fpr, p.tpr);
    }
    let r = optimal_cutoff(&scores, &declined).expect("both classes present");
    println!(
        "cut-off {} sens {:.3} spec {:.3} auc {:.3} metric {:.3} suitable {}",
        r.cutoff, r.sensitivity, r.specificity, r.auc, r.metric_score, r.suitable
    );
}
