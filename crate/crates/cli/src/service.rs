//! Local HTTP annotation service.
//!
//! | method | path                          | body                              |
//! |--------|-------------------------------|-----------------------------------|
//! | GET    | `/videos`                     | video descriptors                 |
//! | GET    | `/videos/{id}/meta`           | descriptor, frame segments, revision |
//! | GET    | `/videos/{id}/frames/{n}`     | image bytes                       |
//! | GET    | `/videos/{id}/telemetry`      | telemetry samples                 |
//! | GET    | `/videos/{id}/annotations`    | annotation document               |
//! | PUT    | `/videos/{id}/annotations`    | full document; `revision` must equal the stored one |
//! | GET    | `/videos/{id}/suggestions`    | automatic longitudinal spans and crossing candidates |
//!
//! Errors are JSON `{"error": message}`. A stale revision gets 409 with the stored
//! `current_revision`; an invalid document 422; writes to a read-only service 403.
//! With a token configured every request needs `Authorization: Bearer <token>`.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use gazeaudit_core::audit::{detect_frame_gaps, list_frame_images};
use gazeaudit_core::context::{match_route, parse_osm_extract, suggested_events, DEFAULT_MATCH_RADIUS_M};
use gazeaudit_core::io::{load_manifest, read_telemetry_csv, Annotations, DatasetManifest, VideoEntry};
use gazeaudit_core::segment::{segment_speed, SegmentationConfig};
use serde_json::json;
use tokio::sync::Mutex;

use crate::{video_num_frames, CliError, CliResult};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub manifest: PathBuf,
    pub read_only: bool,
    pub token: Option<String>,
}

struct Video {
    entry: VideoEntry,
    num_frames: u64,
    frames: BTreeMap<u64, PathBuf>,
    write_lock: Mutex<()>,
}

pub struct AppState {
    videos: Vec<Video>,
    by_id: HashMap<String, usize>,
    read_only: bool,
    token: Option<String>,
}

impl AppState {
    pub fn new(manifest: DatasetManifest, read_only: bool, token: Option<String>) -> CliResult<Self> {
        let mut videos = Vec::new();
        for entry in manifest.videos {
            let frames = match &entry.frames {
                Some(d) => list_frame_images(d)?,
                None => BTreeMap::new(),
            };
            videos.push(Video {
                num_frames: video_num_frames(&entry)?,
                entry,
                frames,
                write_lock: Mutex::new(()),
            });
        }
        let by_id = videos.iter().enumerate().map(|(i, v)| (v.entry.id.clone(), i)).collect();
        Ok(Self {
            videos,
            by_id,
            read_only,
            token,
        })
    }

    pub fn from_config(config: &ServiceConfig) -> CliResult<Self> {
        if config.bind.port() == 0 {
            return Err(CliError::Usage("bind port must be in 1..65535".into()));
        }
        Self::new(load_manifest(&config.manifest)?, config.read_only, config.token.clone())
    }

    fn video(&self, id: &str) -> Result<&Video, ApiError> {
        self.by_id
            .get(id)
            .map(|&i| &self.videos[i])
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown video `{id}`")))
    }
}

struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn descriptor(v: &Video) -> serde_json::Value {
    let e = &v.entry;
    json!({
        "id": e.id,
        "fps": e.fps,
        "width": e.width,
        "height": e.height,
        "num_frames": v.num_frames,
        "has_frames": !v.frames.is_empty(),
        "has_telemetry": e.telemetry.is_some(),
        "has_annotations": e.annotations.as_deref().is_some_and(Path::is_file),
    })
}

fn json_bytes(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

async fn list_videos(State(s): State<Arc<AppState>>) -> Json<Vec<serde_json::Value>> {
    Json(s.videos.iter().map(descriptor).collect())
}

fn stored_revision(v: &Video) -> ApiResult<u64> {
    match v.entry.annotations.as_deref().filter(|p| p.is_file()) {
        Some(p) => Annotations::read(p).map(|a| a.revision).map_err(ApiError::internal),
        None => Ok(0),
    }
}

async fn meta(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<serde_json::Value>> {
    let v = s.video(&id)?;
    let mut d = descriptor(v);
    let idx: Vec<u64> = v.frames.keys().copied().collect();
    let segments = if idx.is_empty() {
        Vec::new()
    } else {
        detect_frame_gaps(&idx, v.entry.fps).map_err(ApiError::internal)?.segments
    };
    d["frame_segments"] = json!(segments);
    d["revision"] = json!(stored_revision(v)?);
    Ok(Json(d))
}

async fn frame(
    State(s): State<Arc<AppState>>,
    UrlPath((id, n)): UrlPath<(String, u64)>,
) -> ApiResult<Response> {
    let v = s.video(&id)?;
    if n >= v.num_frames {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            format!("frame {n} outside 0..{}", v.num_frames),
        ));
    }
    let path = v
        .frames
        .get(&n)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("frame {n} has no image")))?;
    let bytes = tokio::fs::read(path).await.map_err(ApiError::internal)?;
    let mime = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => "image/png",
        _ => "image/jpeg",
    };
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}

async fn telemetry(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let v = s.video(&id)?;
    let path = v
        .entry
        .telemetry
        .clone()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("video `{id}` has no telemetry")))?;
    let samples = tokio::task::spawn_blocking(move || read_telemetry_csv(&path))
        .await
        .map_err(ApiError::internal)?
        .map_err(ApiError::internal)?;
    Ok(json_bytes(serde_json::to_vec(&samples).map_err(ApiError::internal)?))
}

async fn get_annotations(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let v = s.video(&id)?;
    match v.entry.annotations.as_deref().filter(|p| p.is_file()) {
        Some(p) => Ok(json_bytes(tokio::fs::read(p).await.map_err(ApiError::internal)?)),
        None => Ok(json_bytes(Annotations::new(&v.entry.id, v.num_frames).to_json_bytes())),
    }
}

async fn put_annotations(
    State(s): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Response> {
    if s.read_only {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "service is read-only"));
    }
    let v = s.video(&id)?;
    let path = v.entry.annotations.clone().ok_or_else(|| {
        ApiError::new(StatusCode::NOT_FOUND, format!("video `{id}` has no annotations path in the manifest"))
    })?;
    let unprocessable = |m: String| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, m);
    let mut doc = Annotations::from_json_bytes(&body, &path).map_err(|e| unprocessable(e.to_string()))?;
    if doc.video_id != v.entry.id {
        return Err(unprocessable(format!("video_id `{}` does not match `{id}`", doc.video_id)));
    }
    if doc.num_frames != v.num_frames {
        return Err(unprocessable(format!(
            "num_frames {} does not match the video's {}",
            doc.num_frames, v.num_frames
        )));
    }
    doc.refresh_categories();
    doc.validate().map_err(|e| unprocessable(e.to_string()))?;

    let _guard = v.write_lock.lock().await;
    let current = stored_revision(v)?;
    if doc.revision != current {
        return Err(ApiError {
            status: StatusCode::CONFLICT,
            body: json!({
                "error": format!("stale revision {}; stored revision is {current}", doc.revision),
                "current_revision": current,
            }),
        });
    }
    doc.revision = current + 1;
    let bytes = doc.to_json_bytes();
    let written = bytes.clone();
    tokio::task::spawn_blocking(move || gazeaudit_core::io::write_atomic(&path, &written))
        .await
        .map_err(ApiError::internal)?
        .map_err(ApiError::internal)?;
    Ok(json_bytes(bytes))
}

fn suggestions_for(entry: &VideoEntry, num_frames: u64) -> gazeaudit_core::Result<serde_json::Value> {
    let Some(tpath) = &entry.telemetry else {
        return Ok(json!({ "longitudinal": [], "events": [] }));
    };
    let track = read_telemetry_csv(tpath)?;
    let seg = segment_speed::<f64>(&track, entry.fps, &SegmentationConfig::default())?;
    let mut ann = Annotations::new(&entry.id, num_frames);
    ann.set_longitudinal(&seg.labels_for_video(num_frames));
    let events = match &entry.osm {
        Some(p) => {
            let graph = parse_osm_extract(p)?;
            suggested_events(&match_route(&track, &graph, DEFAULT_MATCH_RADIUS_M)?)
                .into_iter()
                .filter(|e| e.crossing_frame < num_frames)
                .collect()
        }
        None => Vec::new(),
    };
    Ok(json!({ "longitudinal": ann.longitudinal, "events": events }))
}

async fn suggestions(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<serde_json::Value>> {
    let v = s.video(&id)?;
    let (entry, n) = (v.entry.clone(), v.num_frames);
    let out = tokio::task::spawn_blocking(move || suggestions_for(&entry, n))
        .await
        .map_err(ApiError::internal)?
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    Ok(Json(out))
}

async fn check_token(State(s): State<Arc<AppState>>, headers: HeaderMap, req: Request, next: Next) -> Response {
    if let Some(token) = &s.token {
        let ok = headers
            .get(header::AUTHORIZATION)
            .and_then(|h| h.to_str().ok())
            .and_then(|h| h.strip_prefix("Bearer "))
            .is_some_and(|t| t == token);
        if !ok {
            return ApiError::new(StatusCode::UNAUTHORIZED, "missing or wrong bearer token").into_response();
        }
    }
    next.run(req).await
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/videos", get(list_videos))
        .route("/videos/{id}/meta", get(meta))
        .route("/videos/{id}/frames/{n}", get(frame))
        .route("/videos/{id}/telemetry", get(telemetry))
        .route("/videos/{id}/annotations", get(get_annotations).put(put_annotations))
        .route("/videos/{id}/suggestions", get(suggestions))
        .layer(middleware::from_fn_with_state(state.clone(), check_token))
        .with_state(state)
}

/// Binds and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> CliResult<()> {
    let state = Arc::new(AppState::from_config(&config)?);
    let listener = tokio::net::TcpListener::bind(config.bind)
        .await
        .map_err(|e| CliError::Io(format!("cannot bind {}: {e}", config.bind)))?;
    eprintln!("serving {} videos on http://{}", state.videos.len(), config.bind);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| CliError::Io(e.to_string()))
}
