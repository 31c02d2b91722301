#![allow(dead_code)]

use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use skycrew_core::sim::{read_log, replay_to, ReplayReport};
use skycrew_core::{LogEntry, Mission, ScenarioConfig};
use skycrew_gateway::{router, Handle};
use tower::ServiceExt;

pub fn fig4() -> ScenarioConfig {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/fig4.json");
    ScenarioConfig::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn reference_log(s: ScenarioConfig) -> Vec<String> {
    let mut m = Mission::new(s);
    m.run();
    m.log().iter().map(LogEntry::to_line).collect()
}

pub fn parse(lines: &[impl AsRef<str>]) -> Vec<LogEntry> {
    lines.iter().map(|l| serde_json::from_str(l.as_ref()).unwrap()).collect()
}

/// Replay `lines`, then silent steps up to `step`.
pub fn replay_lines(lines: &[impl AsRef<str>], step: u64) -> ReplayReport<f64> {
    let text: String = lines.iter().map(|l| format!("{}\n", l.as_ref())).collect();
    replay_to(&read_log(text.as_bytes()).unwrap(), Some(step)).unwrap()
}

/// Poll until `pred` holds or panic after a few seconds.
pub fn wait_until(what: &str, mut pred: impl FnMut() -> bool) {
    let t0 = Instant::now();
    while !pred() {
        assert!(t0.elapsed() < Duration::from_secs(20), "timed out waiting for {what}");
        std::thread::sleep(Duration::from_millis(2));
    }
}

pub async fn call(h: &Handle, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = router(h.clone()).oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

pub async fn get_json(h: &Handle, uri: &str) -> Value {
    let (status, body) = call(h, Method::GET, uri, None).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
    serde_json::from_slice(&body).unwrap()
}

pub async fn command(h: &Handle, body: Value) -> (StatusCode, Value) {
    let (status, bytes) = call(h, Method::POST, "/command", Some(body)).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}
