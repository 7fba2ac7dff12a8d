//! Runs a scripted participant against the HTTP session API in-process,
//! printing each request the battery UI would make.

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::Request;
use csqvr::session::{Activity, ScriptedParticipant, SessionStore};
use csqvr_cli::server::{router, Appended, Created};
use serde_json::Value;
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Value) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(if body.is_null() { Body::empty() } else { Body::from(body.to_string()) })
        .expect("valid request");
    let resp = app.clone().oneshot(req).await.expect("router is infallible");
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.expect("body fits");
    let v: Value = serde_json::from_slice(&bytes).expect("JSON body");
    assert!(status.is_success(), "{method} {uri}: {status} {v}");
    v
}

#[tokio::main]
async fn main() {
    let dir = std::env::temp_dir().join(format!("csqvr-http-{}", std::process::id()));
    let app = router(Arc::new(SessionStore::open(&dir).expect("writable store")));

    let body = serde_json::json!({ "participant": "P01", "seed": 3, "ride_duration_ms": 2000 });
    let created: Created = serde_json::from_value(call(&app, "POST", "/sessions", body).await).expect("created");
    println!("POST /sessions -> {} ({} segments)", created.id, created.plan.len());

    let mut next: Activity = serde_json::from_value(call(&app, "GET", &format!("/sessions/{}/next", created.id), Value::Null).await).expect("activity");
    let mut who = ScriptedParticipant::new(4);
    let mut posts = 0;
    while next != Activity::Finished {
        let events = who.respond(&next);
        let uri = format!("/sessions/{}/events", created.id);
        let a: Appended = serde_json::from_value(call(&app, "POST", &uri, serde_json::to_value(&events).expect("serializable")).await).expect("appended");
        if posts < 4 {
            println!("POST {uri} [{} events] -> {}", events.len(), serde_json::to_string(&a.decisions).expect("serializable"));
        }
        posts += 1;
        next = a.next;
    }
    let report = call(&app, "GET", &format!("/sessions/{}/report", created.id), Value::Null).await;
    println!("... {posts} batches in total");
    for s in report["stages"].as_array().expect("stages") {
        println!("{}: CSQ-VR total {} CRT RT {}", s["stage"], s["csqvr_vr"]["total"], s["crt"]["rt_mean"]);
    }
    let _ = std::fs::remove_dir_all(&dir);
}
