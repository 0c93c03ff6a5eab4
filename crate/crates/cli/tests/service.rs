mod support;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use gazeaudit_cli::{router, AppState};
use gazeaudit_core::io::{load_manifest, Annotations, LateralSpan};
use gazeaudit_core::model::{LateralAction, Longitudinal};
use gazeaudit_core::synth::{DemoDataset, DemoLayout};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

struct Fixture {
    dir: tempfile::TempDir,
    ds: DemoDataset,
    app: Router,
}

fn fixture(read_only: bool, token: Option<&str>) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let (ds, m) = support::write_demo(dir.path());
    let state = AppState::new(load_manifest(&m).unwrap(), read_only, token.map(String::from)).unwrap();
    Fixture {
        app: router(Arc::new(state)),
        dir,
        ds,
    }
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Option<String>, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string());
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, ctype, body)
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn put(uri: &str, body: Vec<u8>) -> Request<Body> {
    Request::put(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body))
        .unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

async fn current(app: &Router, id: &str) -> Annotations {
    let (status, _, body) = send(app, get(&format!("/videos/{id}/annotations"))).await;
    assert_eq!(status, StatusCode::OK);
    Annotations::from_json_bytes(&body, std::path::Path::new(id)).unwrap()
}

#[tokio::test]
async fn lists_both_fixture_videos() {
    let f = fixture(false, None);
    let (status, _, body) = send(&f.app, get("/videos")).await;
    assert_eq!(status, StatusCode::OK);
    let list = json(&body);
    let ids: Vec<&str> = list.as_array().unwrap().iter().map(|v| v["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["drive_a", "drive_b"]);
    assert_eq!(list[0]["num_frames"], 380);
}

#[tokio::test]
async fn meta_reports_frame_segments_and_revision() {
    let f = fixture(false, None);
    let (status, _, body) = send(&f.app, get("/videos/drive_b/meta")).await;
    assert_eq!(status, StatusCode::OK);
    let meta = json(&body);
    assert_eq!(meta["frame_segments"], serde_json::json!([[5, 199], [230, 299]]));
    assert_eq!(meta["revision"], 0);
    let (status, _, _) = send(&f.app, get("/videos/nope/meta")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn frames_are_served_as_stored() {
    let f = fixture(false, None);
    let (status, ctype, body) = send(&f.app, get("/videos/drive_a/frames/12")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ctype.as_deref(), Some("image/png"));
    let on_disk = std::fs::read(f.dir.path().join(DemoLayout::frames("drive_a")).join("000012.png")).unwrap();
    assert_eq!(body, on_disk);
    for missing in ["/videos/drive_a/frames/105", "/videos/drive_a/frames/380"] {
        assert_eq!(send(&f.app, get(missing)).await.0, StatusCode::NOT_FOUND);
    }
    assert_eq!(send(&f.app, get("/videos/drive_a/frames/x")).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn telemetry_has_one_sample_per_frame() {
    let f = fixture(false, None);
    let (status, _, body) = send(&f.app, get("/videos/drive_b/telemetry")).await;
    assert_eq!(status, StatusCode::OK);
    let samples = json(&body);
    assert_eq!(samples.as_array().unwrap().len(), 300);
    assert_eq!(samples[0]["speed_kmh"], 36.0);
}

#[tokio::test]
async fn put_then_get_is_byte_identical() {
    let f = fixture(false, None);
    let mut doc = current(&f.app, "drive_a").await;
    assert_eq!(doc.revision, 0);
    doc.lateral.push(LateralSpan {
        start_frame: 340,
        end_frame: 350,
        action: LateralAction::LaneChange,
    });
    let (status, _, stored) = send(&f.app, put("/videos/drive_a/annotations", doc.to_json_bytes())).await;
    assert_eq!(status, StatusCode::OK);
    let (_, ctype, fetched) = send(&f.app, get("/videos/drive_a/annotations")).await;
    assert_eq!(ctype.as_deref(), Some("application/json"));
    assert_eq!(fetched, stored);
    let back = Annotations::from_json_bytes(&fetched, std::path::Path::new("a")).unwrap();
    assert_eq!(back.revision, 1);
    assert_eq!(Annotations { revision: 0, ..back }, doc);
    let on_disk = std::fs::read(f.dir.path().join(DemoLayout::annotations("drive_a"))).unwrap();
    assert_eq!(on_disk, stored);
}

#[tokio::test]
async fn invalid_documents_are_rejected_unchanged() {
    let f = fixture(false, None);
    let path = f.dir.path().join(DemoLayout::annotations("drive_a"));
    let before = std::fs::read(&path).unwrap();
    let mut doc = current(&f.app, "drive_a").await;
    doc.lateral.push(LateralSpan {
        start_frame: 370,
        end_frame: 400,
        action: LateralAction::Turn,
    });
    let (status, _, body) = send(&f.app, put("/videos/drive_a/annotations", doc.to_json_bytes())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(json(&body)["error"].as_str().unwrap().contains("400"));

    let mut other = current(&f.app, "drive_a").await;
    other.video_id = "drive_b".into();
    let (status, _, _) = send(&f.app, put("/videos/drive_a/annotations", other.to_json_bytes())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _, _) = send(&f.app, put("/videos/drive_a/annotations", b"{not json".to_vec())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(std::fs::read(&path).unwrap(), before);
}

#[tokio::test]
async fn stale_revision_is_a_conflict() {
    let f = fixture(false, None);
    let doc = current(&f.app, "drive_b").await;
    let (status, _, _) = send(&f.app, put("/videos/drive_b/annotations", doc.to_json_bytes())).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _, body) = send(&f.app, put("/videos/drive_b/annotations", doc.to_json_bytes())).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(json(&body)["current_revision"], 1);
    assert_eq!(current(&f.app, "drive_b").await.revision, 1);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_writes_resolve_to_one_whole_document() {
    let f = fixture(false, None);
    let base = current(&f.app, "drive_a").await;
    let docs: Vec<Annotations> = (0..8u64)
        .map(|i| {
            let mut d = base.clone();
            d.lateral = (0..20)
                .map(|k| LateralSpan {
                    start_frame: i + 15 * k,
                    end_frame: i + 15 * k + 5,
                    action: LateralAction::LaneChange,
                })
                .collect();
            d
        })
        .collect();
    let handles: Vec<_> = docs
        .iter()
        .map(|d| {
            let app = f.app.clone();
            let body = d.to_json_bytes();
            tokio::spawn(async move { send(&app, put("/videos/drive_a/annotations", body)).await })
        })
        .collect();
    let mut winners = Vec::new();
    for (i, h) in handles.into_iter().enumerate() {
        let (status, _, body) = h.await.unwrap();
        match status {
            StatusCode::OK => winners.push((i, body)),
            StatusCode::CONFLICT => {}
            s => panic!("unexpected status {s}"),
        }
    }
    assert_eq!(winners.len(), 1);
    let (i, body) = &winners[0];
    let stored = current(&f.app, "drive_a").await;
    assert_eq!(stored.lateral, docs[*i].lateral);
    assert_eq!(&stored.to_json_bytes(), body);
}

#[tokio::test]
async fn read_only_service_refuses_writes() {
    let f = fixture(true, None);
    let doc = current(&f.app, "drive_a").await;
    let (status, _, _) = send(&f.app, put("/videos/drive_a/annotations", doc.to_json_bytes())).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
}

#[tokio::test]
async fn token_is_required_when_configured() {
    let f = fixture(false, Some("s3cret"));
    assert_eq!(send(&f.app, get("/videos")).await.0, StatusCode::UNAUTHORIZED);
    let wrong = Request::get("/videos").header(header::AUTHORIZATION, "Bearer nope").body(Body::empty()).unwrap();
    assert_eq!(send(&f.app, wrong).await.0, StatusCode::UNAUTHORIZED);
    let right = Request::get("/videos").header(header::AUTHORIZATION, "Bearer s3cret").body(Body::empty()).unwrap();
    assert_eq!(send(&f.app, right).await.0, StatusCode::OK);
}

#[tokio::test]
async fn suggestions_match_the_planted_drive() {
    let f = fixture(false, None);
    let (status, _, body) = send(&f.app, get("/videos/drive_b/suggestions")).await;
    assert_eq!(status, StatusCode::OK);
    let s = json(&body);
    let v = f.ds.video("drive_b").unwrap();
    let mut per_frame = Vec::new();
    for span in s["longitudinal"].as_array().unwrap() {
        let label: Longitudinal = serde_json::from_value(span["label"].clone()).unwrap();
        let (a, b) = (span["start_frame"].as_u64().unwrap(), span["end_frame"].as_u64().unwrap());
        per_frame.extend((a..=b).map(|_| label));
    }
    assert_eq!(per_frame, v.drive.truth);
    let frames: Vec<u64> = s["events"].as_array().unwrap().iter().map(|e| e["crossing_frame"].as_u64().unwrap()).collect();
    let planted: Vec<u64> = v
        .junctions
        .iter()
        .filter(|(_, j)| j.intersection_type().is_some())
        .map(|(f, _)| *f)
        .collect();
    assert_eq!(frames, planted);
    assert!(s["events"].as_array().unwrap().iter().all(|e| e["priority"].is_null()));
}
