use csqvr::analysis::assemble_records;
use csqvr::io::{ingest, write_dataset};
use csqvr::session::{replay_log, Activity, NewSession, ScriptedParticipant, SessionStore};
use proptest::prelude::*;

fn run_session(store: &SessionStore, participant: &str, seed: u64, script_seed: u64) -> String {
    let req = NewSession { participant: participant.into(), seed: Some(seed), ride_duration_ms: Some(60_000) };
    let (meta, _) = store.create(req).unwrap();
    let mut who = ScriptedParticipant::new(script_seed);
    let mut next = store.next(&meta.id).unwrap();
    // batch sizes vary with the script, exercising multi-event appends
    while next != Activity::Finished {
        next = store.append(&meta.id, who.respond(&next)).unwrap().1;
    }
    meta.id
}

#[test]
fn log_replays_to_identical_report_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::open(dir.path()).unwrap();
    let id = run_session(&store, "P03", 77, 5);
    let live = store.report(&id).unwrap();
    let replayed = replay_log(&store.log_path(&id)).unwrap();
    assert_eq!(serde_json::to_string(&replayed.report()).unwrap(), serde_json::to_string(&live).unwrap());

    // exported tables feed the batch pipeline to the same stage scores
    let out = tempfile::tempdir().unwrap();
    write_dataset(out.path(), replayed.dataset()).unwrap();
    let (records, issues) = assemble_records(&ingest(&[out.path()]).unwrap());
    assert!(issues.is_empty(), "{issues:?}");
    assert_eq!(records.len(), 4);
    for (rec, st) in records.iter().zip(&live.stages) {
        assert_eq!(rec.stage, st.stage);
        assert_eq!(Some(&rec.csqvr_vr), st.csqvr_vr.as_ref());
        assert_eq!(Some(rec.bdst_score), st.bdst);
        assert_eq!(Some(rec.bcbt_score), st.bcbt);
        assert_eq!(Some(rec.srt_mean), st.srt_mean);
        let crt = st.crt.as_ref().unwrap();
        assert_eq!(rec.crt_rt_mean, crt.rt_mean);
        assert_eq!(rec.crt_at_mean, crt.at_mean);
        assert_eq!(rec.crt_mt_mean, crt.mt_mean);
        assert_eq!(rec.pupil_mean, st.pupil_mean);
    }

    // reopening the store rebuilds every session from disk
    let reopened = SessionStore::open(dir.path()).unwrap();
    assert_eq!(reopened.ids(), vec![id.clone()]);
    assert_eq!(reopened.report(&id).unwrap(), live);
}

#[test]
fn rejected_batches_leave_no_trace() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::open(dir.path()).unwrap();
    let (meta, _) = store.create(NewSession { participant: "P01".into(), ..Default::default() }).unwrap();
    let mut who = ScriptedParticipant::new(1);
    let good = who.respond(&store.next(&meta.id).unwrap());
    let mut batch = good.clone();
    let mut dup = good[0].clone();
    dup.seq = good[0].seq;
    batch.push(dup);
    assert!(store.append(&meta.id, batch).is_err());
    let (_, events) = csqvr::session::read_log(&store.log_path(&meta.id)).unwrap();
    assert!(events.is_empty());
    store.append(&meta.id, good).unwrap();
    assert_eq!(store.report(&meta.id).unwrap().events, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn any_scripted_session_replays_byte_identically(seed in any::<u64>(), script in any::<u64>(), ability in 2u8..8) {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let req = NewSession { participant: "P09".into(), seed: Some(seed), ride_duration_ms: Some(1_000) };
        let (meta, _) = store.create(req).unwrap();
        let mut who = ScriptedParticipant::new(script);
        who.span_ability = ability;
        let mut next = store.next(&meta.id).unwrap();
        while next != Activity::Finished {
            next = store.append(&meta.id, who.respond(&next)).unwrap().1;
        }
        let live = serde_json::to_vec(&store.report(&meta.id).unwrap()).unwrap();
        let again = serde_json::to_vec(&replay_log(&store.log_path(&meta.id)).unwrap().report()).unwrap();
        prop_assert_eq!(live, again);
    }
}
