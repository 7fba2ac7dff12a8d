//! Drives one full administration session with a scripted participant, then
//! rebuilds it from the event log alone.

use csqvr::session::{replay_log, Activity, NewSession, ScriptedParticipant, SessionStore};

fn main() {
    let dir = std::env::temp_dir().join(format!("csqvr-session-{}", std::process::id()));
    let store = SessionStore::open(&dir).expect("store directory is writable");
    let req = NewSession { participant: "P01".into(), seed: Some(1), ride_duration_ms: Some(5_000) };
    let (meta, plan) = store.create(req).expect("new session");
    println!("session {} plan {:?}", meta.id, plan.iter().map(ToString::to_string).collect::<Vec<_>>());

    let mut who = ScriptedParticipant::new(2);
    let mut next = store.next(&meta.id).expect("known session");
    let mut batches = 0;
    while next != Activity::Finished {
        next = store.append(&meta.id, who.respond(&next)).expect("protocol accepts the script").1;
        batches += 1;
    }
    let live = store.report(&meta.id).expect("known session");
    for s in &live.stages {
        println!(
            "{}: CSQ-VR {:?} BDST {:?} BCBT {:?} SRT {:.0?} pupil {:.2?}",
            s.stage,
            s.csqvr_vr.as_ref().map(|r| r.total),
            s.bdst,
            s.bcbt,
            s.srt_mean,
            s.pupil_mean
        );
    }
    let replayed = replay_log(&store.log_path(&meta.id)).expect("log is readable").report();
    println!("{batches} batches, {} events; replay identical: {}", live.events, replayed == live);
    let _ = std::fs::remove_dir_all(&dir);
}
