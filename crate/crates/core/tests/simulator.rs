use std::collections::BTreeMap;

use csqvr::analysis::assemble_records;
use csqvr::io::QUESTIONNAIRE_EPISODE;
use csqvr::simulate::{simulate_cohort, SimConfig, SimError};
use csqvr::{validate_response, AssessmentRecord, Instrument, Pupil, Stage};

fn records(cfg: &SimConfig) -> (csqvr::simulate::Simulation, Vec<AssessmentRecord>) {
    let sim = simulate_cohort(cfg).unwrap();
    let (recs, issues) = assemble_records(&sim.dataset);
    assert!(issues.is_empty(), "{issues:?}");
    (sim, recs)
}

#[test]
fn same_seed_same_bytes() {
    let a = serde_json::to_vec(&simulate_cohort(&SimConfig::with_seed(17)).unwrap()).unwrap();
    let b = serde_json::to_vec(&simulate_cohort(&SimConfig::with_seed(17)).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_vec(&simulate_cohort(&SimConfig::with_seed(18)).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn degenerate_generator_repeats_the_baseline() {
    let cfg = SimConfig {
        growth: [0.0; 4],
        latent_noise_sd: 0.0,
        item_noise: 0.0,
        ..SimConfig::with_seed(3)
    };
    let (_, recs) = records(&cfg);
    let mut by_participant: BTreeMap<_, Vec<f64>> = BTreeMap::new();
    for r in &recs {
        by_participant.entry(r.participant.clone()).or_default().push(r.csqvr_vr.total);
    }
    for (p, totals) in by_participant {
        assert_eq!(totals.len(), 4);
        assert!(totals.iter().all(|&t| t == totals[0]), "{p:?}: {totals:?}");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    for cfg in [
        SimConfig { n_participants: 1, ..Default::default() },
        SimConfig { pupil_coupling: 0.3, ..Default::default() },
        SimConfig { item_noise: -1.0, ..Default::default() },
        SimConfig { blink_rate: 1.5, ..Default::default() },
        SimConfig { decline_magnitude_sd: f64::NAN, ..Default::default() },
    ] {
        assert!(matches!(simulate_cohort(&cfg), Err(SimError::InvalidConfig(_))), "{cfg:?}");
    }
}

#[test]
fn csqvr_means_rise_over_fifty_seeds() {
    let mut sums = [0.0; 4];
    for seed in 0..50 {
        let (_, recs) = records(&SimConfig::with_seed(seed));
        for r in recs {
            sums[r.stage.index()] += r.csqvr_vr.total;
        }
    }
    assert!(sums.windows(2).all(|w| w[0] <= w[1]), "{sums:?}");
}

#[test]
fn every_response_and_stream_is_valid() {
    for seed in 0..10 {
        let cfg = SimConfig { crt_gaze_streams: seed % 2 == 0, ..SimConfig::with_seed(seed) };
        let sim = simulate_cohort(&cfg).unwrap();
        let d = &sim.dataset;
        for r in &d.responses {
            validate_response(r.clone()).unwrap();
        }
        for inst in [Instrument::CsqvrPaper, Instrument::Ssq, Instrument::Vrsq, Instrument::CsqvrVr] {
            assert!(d.responses.iter().any(|r| r.instrument == inst), "{inst}");
        }
        // MSSQ enters as the screening total only
        assert!(d.participants.iter().all(|p| (0.0..=54.0).contains(&p.mssq_total)));
        let mut streams: BTreeMap<(_, _, _), Vec<i64>> = BTreeMap::new();
        for g in &d.gaze {
            for p in [g.sample.pupil_left, g.sample.pupil_right] {
                if let Pupil::Valid(mm) = p {
                    assert!(mm > 0.0 && mm.is_finite());
                }
            }
            streams.entry((g.participant.clone(), g.stage, g.episode.clone())).or_default().push(g.sample.t);
        }
        for (key, ts) in &streams {
            assert!(ts.windows(2).all(|w| w[0] < w[1]), "{key:?}");
        }
        let questionnaire = streams.keys().filter(|k| k.2 == QUESTIONNAIRE_EPISODE).count();
        assert_eq!(questionnaire, cfg.n_participants * 4);
        assert_eq!(streams.len() > questionnaire, cfg.crt_gaze_streams);
    }
}

#[test]
fn pupil_tracks_latent_negatively() {
    let (sim, recs) = records(&SimConfig::with_seed(5));
    let pairs: Vec<(f64, f64)> = sim
        .ground_truth
        .iter()
        .filter_map(|g| {
            let r = recs.iter().find(|r| r.participant == g.participant && r.stage == g.stage)?;
            Some((g.latent, r.pupil_mean?))
        })
        .collect();
    let r = pearson(&pairs);
    assert!(r < -0.1, "r = {r}");
}

fn pearson(p: &[(f64, f64)]) -> f64 {
    let n = p.len() as f64;
    let (mx, my) = (p.iter().map(|v| v.0).sum::<f64>() / n, p.iter().map(|v| v.1).sum::<f64>() / n);
    let sxy: f64 = p.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum();
    let sxx: f64 = p.iter().map(|v| (v.0 - mx).powi(2)).sum();
    let syy: f64 = p.iter().map(|v| (v.1 - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn two_sd_threshold(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    mean + 2.0 * var.sqrt()
}

/// Injected declines clear the generated baseline's 2-SD line for RT or MT.
#[test]
fn injected_declines_are_detectable() {
    let seeds = 40;
    let mut good_seeds = 0;
    for seed in 0..seeds {
        let (sim, recs) = records(&SimConfig::with_seed(seed));
        let base = |f: fn(&AssessmentRecord) -> Option<f64>| {
            let v: Vec<f64> = recs.iter().filter(|r| r.stage == Stage::Baseline).filter_map(f).collect();
            two_sd_threshold(&v)
        };
        let rt_line = base(|r| Some(r.crt_rt_mean));
        let mt_line = base(|r| r.crt_mt_mean);
        let injected: Vec<_> = sim.ground_truth.iter().filter(|g| g.decline_injected).collect();
        let detected = injected
            .iter()
            .filter(|g| {
                let r = recs.iter().find(|r| r.participant == g.participant && r.stage == g.stage).unwrap();
                r.crt_rt_mean > rt_line || r.crt_mt_mean.is_some_and(|m| m > mt_line)
            })
            .count();
        if injected.is_empty() || detected as f64 >= 0.95 * injected.len() as f64 {
            good_seeds += 1;
        }
    }
    assert!(good_seeds as f64 >= 0.95 * f64::from(seeds as u32), "{good_seeds}/{seeds}");
}
