//! Random-intercept model: pupil size against CSQ-VR total across repeated
//! assessments, both ordered-quantile transformed.

use csqvr::analysis::assemble_records;
use csqvr::simulate::{simulate_cohort, SimConfig};
use csqvr::stats::{fit_random_intercept, orq_normalize, LmmMethod, PlottingPosition};

fn main() {
    let sim = simulate_cohort(&SimConfig::with_seed(3)).expect("default config is valid");
    let (records, _) = assemble_records(&sim.dataset);
    let rows: Vec<_> = records.iter().filter_map(|r| Some((r.csqvr_vr.total, r.pupil_mean?, r.participant.clone()))).collect();
    let y = orq_normalize(&rows.iter().map(|r| r.0).collect::<Vec<_>>(), PlottingPosition::default()).expect("finite");
    let x = orq_normalize(&rows.iter().map(|r| r.1).collect::<Vec<_>>(), PlottingPosition::default()).expect("finite");
    let groups: Vec<_> = rows.iter().map(|r| r.2.clone()).collect();
    for method in [LmmMethod::Ml, LmmMethod::Reml] {
        let f = fit_random_intercept(&y, &x, &groups, method).expect("well-posed");
        println!(
            "{method:?}: beta1 {:.3} var_u {:.3} var_e {:.3} R2m {:.3} R2c {:.3} logLik {:.2}",
            f.beta1, f.var_group, f.var_resid, f.r2_marginal, f.r2_conditional, f.log_likelihood
        );
    }
}
