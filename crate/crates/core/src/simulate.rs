//! Seeded synthetic cohorts with known ground truth.
//!
//! Each participant carries a latent sickness level per stage,
//! `baseline + growth[stage] * susceptibility + noise`, clamped at zero.
//! Questionnaire items are ordinal readouts of that latent through equally
//! spaced thresholds with logistic jitter. During rides a psychomotor decline
//! is injected with a probability that rises with the latent; a declined cell
//! shifts choice-reaction motor time by a fixed number of between-participant
//! SDs. Pupil size falls with the latent.

use std::fs;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    DominantEye, Instrument, ParticipantId, ParticipantRecord, Pupil, QuestionnaireResponse, Sex, Stage,
    Timepoint,
};
use crate::io::{
    crt_episode, write_dataset, CohortDataset, GazeRow, IngestError, TrialRow, QUESTIONNAIRE_EPISODE,
};
use crate::scoring::score_mssq;
use crate::tasks::rt::{attach_gaze, CRT_TARGETS, CRT_TRIALS, SRT_TRIALS};
use crate::tasks::{RtTaskKind, RtTrial, SpanTaskConfig, SpanTaskKind, SpanTaskState};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
}

/// Reaction-time generator parameters in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReactionParams {
    pub srt_mean: f64,
    pub srt_sd_between: f64,
    pub srt_sd_trial: f64,
    pub crt_at_mean: f64,
    pub crt_at_sd_between: f64,
    pub crt_mt_mean: f64,
    pub crt_mt_sd_between: f64,
    pub crt_sd_trial: f64,
    pub crt_error_rate: f64,
    /// Share of correct CRT trials with no on-target gaze before the touch.
    pub gaze_missing_rate: f64,
    pub foreperiod_min_ms: i64,
    pub foreperiod_max_ms: i64,
}

impl Default for ReactionParams {
    fn default() -> Self {
        Self {
            srt_mean: 310.0,
            srt_sd_between: 30.0,
            srt_sd_trial: 35.0,
            crt_at_mean: 290.0,
            crt_at_sd_between: 35.0,
            crt_mt_mean: 240.0,
            crt_mt_sd_between: 30.0,
            crt_sd_trial: 40.0,
            crt_error_rate: 0.04,
            gaze_missing_rate: 0.05,
            foreperiod_min_ms: 1000,
            foreperiod_max_ms: 3000,
        }
    }
}

impl ReactionParams {
    /// Between-participant SD of the CRT reaction-time mean.
    pub fn crt_rt_sd_between(&self) -> f64 {
        self.crt_at_sd_between.hypot(self.crt_mt_sd_between)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n_participants: usize,
    pub seed: u64,
    /// Log-normal susceptibility: `exp(N(mu, sigma))`.
    pub susceptibility_mu: f64,
    pub susceptibility_sigma: f64,
    pub baseline_latent_mean: f64,
    pub baseline_latent_sd: f64,
    /// Multiplier on susceptibility per stage (Baseline, Ride1..Ride3).
    pub growth: [f64; 4],
    pub latent_noise_sd: f64,
    /// Logistic scale of the per-item jitter.
    pub item_noise: f64,
    /// Decline probability is `logistic(intercept + slope * latent)`.
    pub decline_intercept: f64,
    pub decline_slope: f64,
    /// Shift of a declined cell in between-participant SDs of CRT RT.
    pub decline_magnitude_sd: f64,
    pub pupil_baseline_mean: f64,
    pub pupil_baseline_sd: f64,
    /// mm per unit of latent sickness; must be negative or zero.
    pub pupil_coupling: f64,
    pub pupil_noise_sd: f64,
    pub pupil_sample_sd: f64,
    pub blink_rate: f64,
    pub sample_rate_hz: f64,
    pub questionnaire_episode_ms: i64,
    /// Emit a gaze stream per CRT trial in addition to the trial column.
    pub crt_gaze_streams: bool,
    pub reaction: ReactionParams,
    pub span_ability_mean: f64,
    pub span_ability_sd: f64,
    pub span_slope: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_participants: 39,
            seed: 0,
            susceptibility_mu: 0.0,
            susceptibility_sigma: 0.5,
            baseline_latent_mean: 0.35,
            baseline_latent_sd: 0.25,
            growth: [0.0, 0.6, 0.8, 0.9],
            latent_noise_sd: 0.15,
            item_noise: 0.25,
            decline_intercept: -12.0,
            decline_slope: 8.0,
            decline_magnitude_sd: 5.0,
            pupil_baseline_mean: 4.2,
            pupil_baseline_sd: 0.5,
            pupil_coupling: -0.4,
            pupil_noise_sd: 0.1,
            pupil_sample_sd: 0.08,
            blink_rate: 0.02,
            sample_rate_hz: 120.0,
            questionnaire_episode_ms: 10_000,
            crt_gaze_streams: false,
            reaction: ReactionParams::default(),
            span_ability_mean: 5.0,
            span_ability_sd: 1.0,
            span_slope: 1.5,
        }
    }
}

impl SimConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_owned()));
        if self.n_participants < 3 {
            return bad("n_participants must be at least 3");
        }
        let r = &self.reaction;
        let non_negative = [
            ("susceptibility_sigma", self.susceptibility_sigma),
            ("baseline_latent_sd", self.baseline_latent_sd),
            ("latent_noise_sd", self.latent_noise_sd),
            ("item_noise", self.item_noise),
            ("decline_slope", self.decline_slope),
            ("decline_magnitude_sd", self.decline_magnitude_sd),
            ("pupil_baseline_sd", self.pupil_baseline_sd),
            ("pupil_noise_sd", self.pupil_noise_sd),
            ("pupil_sample_sd", self.pupil_sample_sd),
            ("span_ability_sd", self.span_ability_sd),
            ("span_slope", self.span_slope),
            ("reaction.srt_sd_between", r.srt_sd_between),
            ("reaction.srt_sd_trial", r.srt_sd_trial),
            ("reaction.crt_at_sd_between", r.crt_at_sd_between),
            ("reaction.crt_mt_sd_between", r.crt_mt_sd_between),
            ("reaction.crt_sd_trial", r.crt_sd_trial),
        ];
        for (name, v) in non_negative.into_iter().chain(self.growth.iter().map(|&g| ("growth", g))) {
            if !(v.is_finite() && v >= 0.0) {
                return bad(&format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        let finite = [
            ("susceptibility_mu", self.susceptibility_mu),
            ("baseline_latent_mean", self.baseline_latent_mean),
            ("decline_intercept", self.decline_intercept),
            ("span_ability_mean", self.span_ability_mean),
        ];
        if let Some((name, v)) = finite.into_iter().find(|(_, v)| !v.is_finite()) {
            return bad(&format!("{name} must be finite, got {v}"));
        }
        let positive = [
            ("pupil_baseline_mean", self.pupil_baseline_mean),
            ("sample_rate_hz", self.sample_rate_hz),
            ("reaction.srt_mean", r.srt_mean),
            ("reaction.crt_at_mean", r.crt_at_mean),
            ("reaction.crt_mt_mean", r.crt_mt_mean),
        ];
        if let Some((name, v)) = positive.into_iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return bad(&format!("{name} must be positive, got {v}"));
        }
        if !(self.pupil_coupling.is_finite() && self.pupil_coupling <= 0.0) {
            return bad("pupil_coupling must be negative or zero");
        }
        for (name, p) in [
            ("blink_rate", self.blink_rate),
            ("reaction.crt_error_rate", r.crt_error_rate),
            ("reaction.gaze_missing_rate", r.gaze_missing_rate),
        ] {
            if !(0.0..1.0).contains(&p) {
                return bad(&format!("{name} must lie in [0, 1), got {p}"));
            }
        }
        if self.questionnaire_episode_ms <= 0 {
            return bad("questionnaire_episode_ms must be positive");
        }
        if r.foreperiod_min_ms < 0 || r.foreperiod_max_ms < r.foreperiod_min_ms {
            return bad("foreperiod bounds must satisfy 0 <= min <= max");
        }
        Ok(())
    }
}

/// Known truth for one (participant, stage) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub participant: ParticipantId,
    pub stage: Stage,
    pub latent: f64,
    pub decline_injected: bool,
    pub pupil_true: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub config: SimConfig,
    pub dataset: CohortDataset,
    pub ground_truth: Vec<GroundTruth>,
}

fn gauss<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + sd * z
}

fn logistic_noise<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    scale * (u / (1.0 - u)).ln()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Ordinal readout: `min + #{k in 1..=steps : loading * latent + jitter > k}`.
fn ordinal<R: Rng + ?Sized>(rng: &mut R, latent: f64, loading: f64, noise: f64, min: u8, max: u8) -> u8 {
    let v = loading * latent + logistic_noise(rng, noise);
    let steps = f64::from(max - min);
    // strict threshold crossing: v in (k, k+1] reads k steps above the floor
    let k = (v.ceil() - 1.0).clamp(0.0, steps);
    min + k as u8
}

struct Person {
    id: ParticipantId,
    baseline: f64,
    susceptibility: f64,
    pupil_baseline: f64,
    srt_mean: f64,
    at_mean: f64,
    mt_mean: f64,
    bdst_ability: f64,
    bcbt_ability: f64,
}

/// Generates a cohort. Pure function of the config.
pub fn simulate_cohort(config: &SimConfig) -> Result<Simulation, SimError> {
    config.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let width = config.n_participants.to_string().len().max(2);
    let mut data = CohortDataset::default();
    let mut truth = Vec::new();
    for i in 0..config.n_participants {
        let mut rng = ChaCha8Rng::seed_from_u64(master.next_u64());
        let id = ParticipantId(format!("P{:0width$}", i + 1));
        simulate_participant(config, &mut rng, id, &mut data, &mut truth);
    }
    Ok(Simulation { config: config.clone(), dataset: data, ground_truth: truth })
}

fn simulate_participant(
    cfg: &SimConfig,
    rng: &mut ChaCha8Rng,
    id: ParticipantId,
    data: &mut CohortDataset,
    truth: &mut Vec<GroundTruth>,
) {
    let r = &cfg.reaction;
    let p = Person {
        baseline: gauss(rng, cfg.baseline_latent_mean, cfg.baseline_latent_sd).max(0.0),
        susceptibility: gauss(rng, cfg.susceptibility_mu, cfg.susceptibility_sigma).exp(),
        pupil_baseline: gauss(rng, cfg.pupil_baseline_mean, cfg.pupil_baseline_sd).max(2.0),
        srt_mean: gauss(rng, r.srt_mean, r.srt_sd_between).max(150.0),
        at_mean: gauss(rng, r.crt_at_mean, r.crt_at_sd_between).max(120.0),
        mt_mean: gauss(rng, r.crt_mt_mean, r.crt_mt_sd_between).max(80.0),
        bdst_ability: gauss(rng, cfg.span_ability_mean, cfg.span_ability_sd),
        bcbt_ability: gauss(rng, cfg.span_ability_mean + 0.5, cfg.span_ability_sd),
        id,
    };

    data.participants.push(demographics(rng, &p, cfg));

    let pre_latent = p.baseline;
    for instrument in [Instrument::CsqvrPaper, Instrument::Ssq, Instrument::Vrsq] {
        data.responses.push(questionnaire(rng, cfg, &p.id, instrument, Timepoint::Pre, pre_latent));
    }

    let mut last_latent = pre_latent;
    for stage in Stage::ALL {
        let latent = (p.baseline
            + cfg.growth[stage.index()] * p.susceptibility
            + gauss(rng, 0.0, cfg.latent_noise_sd))
        .max(0.0);
        last_latent = latent;
        let declined = stage.is_ride() && rng.random_bool(logistic(cfg.decline_intercept + cfg.decline_slope * latent));
        let pupil_true = (p.pupil_baseline + cfg.pupil_coupling * latent + gauss(rng, 0.0, cfg.pupil_noise_sd)).max(1.5);

        data.responses.push(questionnaire(rng, cfg, &p.id, Instrument::CsqvrVr, stage.into(), latent));
        questionnaire_gaze(rng, cfg, &p.id, stage, pupil_true, &mut data.gaze);
        span_trials(rng, cfg, &p, stage, SpanTaskKind::Bdst, &mut data.trials);
        span_trials(rng, cfg, &p, stage, SpanTaskKind::Bcbt, &mut data.trials);
        srt_trials(rng, r, &p, stage, &mut data.trials);
        let shift = if declined { cfg.decline_magnitude_sd * r.crt_rt_sd_between() } else { 0.0 };
        crt_trials(rng, cfg, &p, stage, shift, pupil_true, data);

        truth.push(GroundTruth { participant: p.id.clone(), stage, latent, decline_injected: declined, pupil_true });
    }

    for instrument in [Instrument::CsqvrPaper, Instrument::Ssq, Instrument::Vrsq] {
        data.responses.push(questionnaire(rng, cfg, &p.id, instrument, Timepoint::Post, last_latent));
    }
}

fn demographics(rng: &mut ChaCha8Rng, p: &Person, cfg: &SimConfig) -> ParticipantRecord {
    // MSSQ items 0..3 track susceptibility; the total is what screening uses
    let mssq: Vec<u8> =
        (0..18).map(|_| ordinal(rng, p.susceptibility, 0.8, cfg.item_noise.max(0.5), 0, 3)).collect();
    let mssq_total = score_mssq(&mssq).map(|s| s.total).unwrap_or(0.0);
    ParticipantRecord {
        id: p.id.clone(),
        age: rng.random_range(19..=40),
        sex: if rng.random_bool(0.5) { Sex::Female } else { Sex::Male },
        education: (gauss(rng, 16.0, 2.0) * 2.0).round() / 2.0,
        experience_vr: rng.random_range(2..=12),
        experience_computing: rng.random_range(2..=12),
        experience_gaming: rng.random_range(2..=12),
        mssq_total,
        dominant_eye: if rng.random_bool(0.7) { DominantEye::Right } else { DominantEye::Left },
    }
}

fn questionnaire(
    rng: &mut ChaCha8Rng,
    cfg: &SimConfig,
    id: &ParticipantId,
    instrument: Instrument,
    timepoint: Timepoint,
    latent: f64,
) -> QuestionnaireResponse {
    let (min, max) = instrument.item_range();
    // 0..3 instruments read the latent at half the resolution of the 7-point scale
    let loading = if max - min == 6 { 1.0 } else { 0.5 };
    let items = (0..instrument.item_count())
        .map(|_| ordinal(rng, latent, loading, cfg.item_noise, min, max))
        .collect();
    QuestionnaireResponse { participant: id.clone(), instrument, timepoint, items }
}

fn pupil_sample(rng: &mut ChaCha8Rng, cfg: &SimConfig, mean: f64) -> Pupil {
    Pupil::Valid(gauss(rng, mean, cfg.pupil_sample_sd).max(1.0))
}

fn eye_pair(rng: &mut ChaCha8Rng, cfg: &SimConfig, mean: f64) -> (Pupil, Pupil) {
    if rng.random_bool(cfg.blink_rate) {
        (Pupil::Invalid, Pupil::Invalid)
    } else {
        (pupil_sample(rng, cfg, mean), pupil_sample(rng, cfg, mean))
    }
}

fn sample_times(cfg: &SimConfig, from_ms: i64, to_ms: i64) -> impl Iterator<Item = i64> {
    let step = 1000.0 / cfg.sample_rate_hz;
    (0..)
        .map(move |k| from_ms + (k as f64 * step).round() as i64)
        .take_while(move |&t| t < to_ms)
}

fn questionnaire_gaze(
    rng: &mut ChaCha8Rng,
    cfg: &SimConfig,
    id: &ParticipantId,
    stage: Stage,
    pupil: f64,
    out: &mut Vec<GazeRow>,
) {
    let mut last = None;
    for t in sample_times(cfg, 0, cfg.questionnaire_episode_ms) {
        if last == Some(t) {
            continue;
        }
        last = Some(t);
        let (l, r) = eye_pair(rng, cfg, pupil);
        let hit = rng.random_bool(0.7);
        out.push(GazeRow::new(id, stage, QUESTIONNAIRE_EPISODE, t, hit, l, r));
    }
}

fn span_trials(
    rng: &mut ChaCha8Rng,
    cfg: &SimConfig,
    p: &Person,
    stage: Stage,
    kind: SpanTaskKind,
    out: &mut Vec<TrialRow>,
) {
    let ability = match kind {
        SpanTaskKind::Bdst => p.bdst_ability,
        SpanTaskKind::Bcbt => p.bcbt_ability,
    };
    let mut state = SpanTaskState::new(SpanTaskConfig::default_for(kind));
    let mut index = 0;
    while !state.finished {
        let length = state.current_length;
        let pc = logistic(cfg.span_slope * (ability - f64::from(length) + 0.5));
        let correct = rng.random_bool(pc.clamp(0.0, 1.0));
        out.push(TrialRow::span(&p.id, stage, kind, index, length, correct));
        index += 1;
        state.advance(correct).expect("loop stops when the task finishes");
    }
}

fn foreperiod(rng: &mut ChaCha8Rng, r: &ReactionParams) -> i64 {
    rng.random_range(r.foreperiod_min_ms..=r.foreperiod_max_ms)
}

fn srt_trials(rng: &mut ChaCha8Rng, r: &ReactionParams, p: &Person, stage: Stage, out: &mut Vec<TrialRow>) {
    for i in 0..SRT_TRIALS as u32 {
        let onset = foreperiod(rng, r);
        let rt = gauss(rng, p.srt_mean, r.srt_sd_trial).max(100.0).round() as i64;
        let trial = RtTrial::new(RtTaskKind::Srt, 0, 0, onset, onset + rt);
        out.push(TrialRow::from_rt(&p.id, stage, i, &trial));
    }
}

fn crt_trials(
    rng: &mut ChaCha8Rng,
    cfg: &SimConfig,
    p: &Person,
    stage: Stage,
    shift: f64,
    pupil: f64,
    data: &mut CohortDataset,
) {
    let r = &cfg.reaction;
    for i in 0..CRT_TRIALS as u32 {
        let onset = foreperiod(rng, r);
        let target = rng.random_range(0..CRT_TARGETS);
        let chosen = if rng.random_bool(r.crt_error_rate) {
            (target + rng.random_range(1..CRT_TARGETS)) % CRT_TARGETS
        } else {
            target
        };
        let at = gauss(rng, p.at_mean, r.crt_sd_trial * 0.75).max(60.0).round() as i64;
        let mt = gauss(rng, p.mt_mean + shift, r.crt_sd_trial * 0.75).max(40.0).round() as i64;
        let gaze_ms = onset + at;
        let mut trial = RtTrial::new(RtTaskKind::Crt, target, chosen, onset, gaze_ms + mt);
        let has_gaze = !rng.random_bool(r.gaze_missing_rate);
        if cfg.crt_gaze_streams {
            // off-target until the first on-target sample, which lands on the gaze time
            let episode = crt_episode(i);
            let end = trial.touch_ms + 100;
            let mut stream = Vec::new();
            for t in sample_times(cfg, onset, end) {
                let hit = has_gaze && t >= gaze_ms || !has_gaze && t > trial.touch_ms;
                let (l, rr) = eye_pair(rng, cfg, pupil);
                stream.push(GazeRow::new(&p.id, stage, &episode, t, hit, l, rr));
            }
            if has_gaze && stream.iter().all(|g| g.sample.t != gaze_ms) {
                let (l, rr) = eye_pair(rng, cfg, pupil);
                let pos = stream.partition_point(|g| g.sample.t < gaze_ms);
                stream.insert(pos, GazeRow::new(&p.id, stage, &episode, gaze_ms, true, l, rr));
            }
            let samples: Vec<_> = stream.iter().map(|g| g.sample).collect();
            attach_gaze(&mut trial, &samples).expect("stream is generated in time order");
            data.gaze.extend(stream);
        } else if has_gaze {
            trial.gaze_on_target_ms = Some(gaze_ms);
        }
        data.trials.push(TrialRow::from_rt(&p.id, stage, i, &trial));
    }
}

pub fn ground_truth_to_csv(rows: &[GroundTruth]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["participant", "stage", "latent", "decline_injected", "pupil_true"]).expect("in-memory write");
    for g in rows {
        w.write_record([
            g.participant.to_string(),
            g.stage.to_string(),
            g.latent.to_string(),
            if g.decline_injected { "1" } else { "0" }.to_owned(),
            g.pupil_true.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Writes the dataset tables plus `ground_truth.csv` and `sim_config.json`.
pub fn write_simulation(dir: &Path, sim: &Simulation) -> Result<(), IngestError> {
    write_dataset(dir, &sim.dataset)?;
    let io = |p: &Path, e| IngestError::Io { path: p.to_owned(), message: format!("{e}") };
    let gt = dir.join(GROUND_TRUTH_FILE);
    fs::write(&gt, ground_truth_to_csv(&sim.ground_truth)).map_err(|e| io(&gt, e))?;
    let cfg = dir.join("sim_config.json");
    let json = serde_json::to_vec_pretty(&sim.config).expect("config serializes");
    fs::write(&cfg, json).map_err(|e| io(&cfg, e))?;
    Ok(())
}
