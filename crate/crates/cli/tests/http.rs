use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use csqvr::session::{replay_log, Activity, ScriptedParticipant, SessionEvent, SessionReport, SessionStore};
use csqvr::{Instrument, Stage};
use csqvr_cli::server::{router, Appended, Created};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

fn de<T: DeserializeOwned>(v: Value) -> T {
    serde_json::from_value(v).unwrap()
}

async fn create(app: &axum::Router, participant: &str, seed: u64) -> Created {
    let (s, v) = call(app, "POST", "/sessions", Some(json!({ "participant": participant, "seed": seed }))).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    de(v)
}

async fn drive(app: &axum::Router, id: &str, seed: u64) -> usize {
    let mut script = ScriptedParticipant::new(seed);
    let (s, v) = call(app, "GET", &format!("/sessions/{id}/next"), None).await;
    assert_eq!(s, StatusCode::OK);
    let mut next: Activity = de(v);
    let mut batches = 0;
    while next != Activity::Finished {
        let events = script.respond(&next);
        let (s, v) = call(app, "POST", &format!("/sessions/{id}/events"), Some(serde_json::to_value(&events).unwrap())).await;
        assert_eq!(s, StatusCode::OK, "{v}");
        let a: Appended = de(v);
        assert_eq!(a.decisions.len(), events.len());
        next = a.next;
        batches += 1;
        assert!(batches < 10_000, "session does not terminate");
    }
    batches
}

#[tokio::test]
async fn scripted_participant_completes_over_http_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(SessionStore::open(dir.path()).unwrap());
    let app = router(store.clone());

    let created = create(&app, "P07", 42).await;
    assert_eq!(created.participant, "P07");
    assert_eq!(created.plan.len(), 9);
    drive(&app, &created.id, 1).await;

    let (s, v) = call(&app, "GET", &format!("/sessions/{}/report", created.id), None).await;
    assert_eq!(s, StatusCode::OK);
    let report: SessionReport = de(v);
    assert!(report.finished);
    let vr = report.questionnaires.iter().filter(|q| q.reports.first().is_some_and(|r| r.instrument == Instrument::CsqvrVr));
    assert_eq!(vr.count(), 4);
    assert_eq!(report.stages.iter().map(|s| s.stage).collect::<Vec<_>>(), Stage::ALL.to_vec());
    for st in &report.stages {
        assert!(st.csqvr_vr.is_some() && st.bdst.is_some() && st.bcbt.is_some());
        assert!(st.srt_mean.is_some() && st.crt.is_some() && st.pupil_mean.is_some(), "{st:?}");
    }

    // after finishing, further events conflict
    let late = SessionEvent {
        session: String::new(),
        seq: report.events as u64 + 1_000,
        t: 1 << 40,
        kind: csqvr::session::EventKind::StageStarted { segment: csqvr::session::Segment::Post },
    };
    let (s, v) = call(&app, "POST", &format!("/sessions/{}/events", created.id), Some(json!([late]))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["error"], "event_after_finish");

    // the log alone reproduces the live report
    let replayed = replay_log(&store.log_path(&created.id)).unwrap().report();
    assert_eq!(replayed, report);

    // and a reopened store serves the same report
    let reopened = router(Arc::new(SessionStore::open(dir.path()).unwrap()));
    let (_, v) = call(&reopened, "GET", &format!("/sessions/{}/report", created.id), None).await;
    assert_eq!(de::<SessionReport>(v), report);
}

#[tokio::test]
async fn error_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(SessionStore::open(dir.path()).unwrap()));

    let (s, v) = call(&app, "GET", "/sessions/nope/next", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown_session");

    let created = create(&app, "P01", 5).await;
    let uri = format!("/sessions/{}/events", created.id);
    let mut script = ScriptedParticipant::new(9);
    let (_, v) = call(&app, "GET", &format!("/sessions/{}/next", created.id), None).await;
    let mut first = script.respond(&de(v));
    first[0].seq = 7;
    let (s, v) = call(&app, "POST", &uri, Some(serde_json::to_value(&first).unwrap())).await;
    assert_eq!(s, StatusCode::OK, "{v}");

    let mut stale = first.clone();
    stale[0].seq = 5;
    let (s, v) = call(&app, "POST", &uri, Some(serde_json::to_value(&stale).unwrap())).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["error"], "out_of_order_seq");

    // an answer before its questionnaire is due is rejected and nothing is stored
    let bogus = json!([{ "seq": 8, "t": 999999, "kind": "stage_completed", "payload": { "segment": "post" } }]);
    let (s, v) = call(&app, "POST", &uri, Some(bogus)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
    let (_, v) = call(&app, "GET", &format!("/sessions/{}/report", created.id), None).await;
    assert_eq!(v["events"], 1);
}
