//! HTTP session service.
//!
//! Volumes are the subdirectories of the service root that contain slice
//! images; an optional `annotations/` folder inside a volume holds LabelMe
//! ground truth. Every session walks `awaiting_seed -> seeded -> tracked`;
//! re-seeding drops back to `seeded` and discards the previous result.
//!
//! | method | route | body / result |
//! |---|---|---|
//! | GET | `/api/volumes` | list of volumes |
//! | GET | `/api/volumes/{name}/slices/{index}` | slice PNG |
//! | POST | `/api/sessions` | `{"volume": name}` -> session |
//! | GET, DELETE | `/api/sessions/{id}` | session view |
//! | PUT | `/api/sessions/{id}/params` | `{"track"?, "detect"?}` |
//! | POST | `/api/sessions/{id}/seed` | seed spec -> seeded keypoints |
//! | POST | `/api/sessions/{id}/track` | run propagation |
//! | GET | `/api/sessions/{id}/slices/{index}/keypoints` | keypoint set |
//! | GET | `/api/sessions/{id}/slices/{index}/hull` | hull vertices or null |
//! | GET | `/api/sessions/{id}/slices/{index}/mask` | 0/255 PNG |
//! | GET | `/api/sessions/{id}/slices/{index}/overlay` | RGBA PNG, mask blended over the slice |
//! | GET | `/api/sessions/{id}/metrics?label=..` | metrics report |

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use keytrack::io::{self, LoadOptions};
use keytrack::pipeline::segment;
use keytrack::{
    evaluate, seed_keypoints, DetectParams, Error as CoreError, KeypointSet, MetricsReport,
    SeedSpec, SegmentationResult, TrackParams, Volume64,
};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use crate::config::Tunables;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    AwaitingSeed,
    Seeded,
    Tracked,
}

pub struct Session {
    pub id: String,
    pub volume_name: String,
    pub volume: Arc<Volume64>,
    pub seed: Option<SeedSpec<f64>>,
    pub seeds: Option<KeypointSet<f64>>,
    pub result: Option<Arc<SegmentationResult<f64>>>,
    pub tunables: Tunables,
    pub state: SessionState,
}

impl Session {
    fn new(id: String, volume_name: String, volume: Arc<Volume64>, tunables: Tunables) -> Self {
        Self {
            id,
            volume_name,
            volume,
            seed: None,
            seeds: None,
            result: None,
            tunables,
            state: SessionState::AwaitingSeed,
        }
    }

    /// Applies a validated seed: the only way into `seeded`.
    fn reseed(&mut self, seed: SeedSpec<f64>, seeds: KeypointSet<f64>) {
        self.seed = Some(seed);
        self.seeds = Some(seeds);
        self.result = None;
        self.state = SessionState::Seeded;
    }

    fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            volume: self.volume_name.clone(),
            state: self.state,
            slice_count: self.volume.len(),
            width: self.volume.width(),
            height: self.volume.height(),
            start_slice: self.seeds.as_ref().map(|s| s.slice_index),
            seed_count: self.seeds.as_ref().map(|s| s.len()).unwrap_or(0),
            stop_up: self.result.as_ref().map(|r| r.stop_up),
            stop_down: self.result.as_ref().map(|r| r.stop_down),
            tunables: self.tunables,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub volume: String,
    pub state: SessionState,
    pub slice_count: usize,
    pub width: usize,
    pub height: usize,
    pub start_slice: Option<usize>,
    pub seed_count: usize,
    pub stop_up: Option<usize>,
    pub stop_down: Option<usize>,
    pub tunables: Tunables,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeInfo {
    pub name: String,
    pub slices: usize,
    pub width: usize,
    pub height: usize,
    pub has_annotations: bool,
}

pub struct AppState {
    root: PathBuf,
    load: LoadOptions,
    defaults: Tunables,
    volumes: Mutex<HashMap<String, Arc<Volume64>>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    pub fn new(root: impl Into<PathBuf>, load: LoadOptions, defaults: Tunables) -> Self {
        Self {
            root: root.into(),
            load,
            defaults,
            volumes: Mutex::new(HashMap::new()),
            sessions: Mutex::new(HashMap::new()),
        }
    }

    fn volume_dir(&self, name: &str) -> Result<PathBuf, ApiError> {
        let valid = !name.is_empty() && name != "." && name != ".." && !name.contains(['/', '\\']);
        let dir = self.root.join(name);
        if !valid || !dir.is_dir() {
            return Err(ApiError::NotFound(format!("no volume named {name:?}")));
        }
        Ok(dir)
    }

    async fn volume(&self, name: &str) -> Result<Arc<Volume64>, ApiError> {
        if let Some(v) = self.volumes.lock().await.get(name) {
            return Ok(v.clone());
        }
        let dir = self.volume_dir(name)?;
        let opts = self.load.clone();
        let vol = tokio::task::spawn_blocking(move || io::load_volume::<f64>(&dir, &opts))
            .await
            .map_err(|e| ApiError::Internal(e.to_string()))??;
        let vol = Arc::new(vol);
        self.volumes
            .lock()
            .await
            .insert(name.to_owned(), vol.clone());
        Ok(vol)
    }

    async fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .lock()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session {id:?}")))
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Conflict(String),
    Unprocessable(String),
    BadRequest(String),
    Internal(String),
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Seed(_) | CoreError::Bounds { .. } | CoreError::Size { .. } => {
                ApiError::Unprocessable(e.to_string())
            }
            CoreError::Config(_) | CoreError::Validation(_) => ApiError::BadRequest(e.to_string()),
            CoreError::EmptyEvaluation | CoreError::NoMasks => {
                ApiError::Unprocessable(e.to_string())
            }
            CoreError::Annotation(_) => ApiError::Unprocessable(e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, m),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(ErrorBody { error: msg })).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn png(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

fn encode_png<P: image::PixelWithColorType>(
    img: &image::ImageBuffer<P, Vec<P::Subpixel>>,
) -> ApiResult<Vec<u8>>
where
    [P::Subpixel]: image::EncodableLayout,
{
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/volumes", get(list_volumes))
        .route("/api/volumes/{name}/slices/{index}", get(volume_slice))
        .route("/api/sessions", post(create_session))
        .route(
            "/api/sessions/{id}",
            get(get_session).delete(delete_session),
        )
        .route("/api/sessions/{id}/params", put(set_params))
        .route("/api/sessions/{id}/seed", post(submit_seed))
        .route("/api/sessions/{id}/track", post(run_track))
        .route(
            "/api/sessions/{id}/slices/{index}/keypoints",
            get(slice_keypoints),
        )
        .route("/api/sessions/{id}/slices/{index}/hull", get(slice_hull))
        .route("/api/sessions/{id}/slices/{index}/mask", get(slice_mask))
        .route(
            "/api/sessions/{id}/slices/{index}/overlay",
            get(slice_overlay),
        )
        .route("/api/sessions/{id}/metrics", get(session_metrics))
        .with_state(state)
}

async fn list_volumes(State(app): State<Arc<AppState>>) -> ApiResult<Json<Vec<VolumeInfo>>> {
    let mut names: Vec<String> = std::fs::read_dir(&app.root)
        .map_err(|e| ApiError::Internal(format!("{}: {e}", app.root.display())))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .filter_map(|e| e.file_name().to_str().map(str::to_owned))
        .collect();
    names.sort();
    let mut out = Vec::new();
    for name in names {
        // directories without slice images are not volumes
        let Ok(vol) = app.volume(&name).await else {
            continue;
        };
        out.push(VolumeInfo {
            has_annotations: app.root.join(&name).join("annotations").is_dir(),
            name,
            slices: vol.len(),
            width: vol.width(),
            height: vol.height(),
        });
    }
    Ok(Json(out))
}

async fn volume_slice(
    State(app): State<Arc<AppState>>,
    UrlPath((name, index)): UrlPath<(String, usize)>,
) -> ApiResult<Response> {
    let vol = app.volume(&name).await?;
    let slice = vol
        .slice(index)
        .ok_or_else(|| ApiError::NotFound(format!("volume {name} has no slice {index}")))?;
    let img =
        image::GrayImage::from_raw(slice.width() as u32, slice.height() as u32, slice.to_u8())
            .ok_or_else(|| ApiError::Internal("slice buffer size".into()))?;
    Ok(png(encode_png(&img)?))
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub volume: String,
    #[serde(default)]
    pub tunables: Option<Tunables>,
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    Json(req): Json<CreateSession>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let vol = app.volume(&req.volume).await?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session::new(
        id.clone(),
        req.volume,
        vol,
        req.tunables.unwrap_or(app.defaults),
    );
    let view = session.view();
    app.sessions
        .lock()
        .await
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<SessionView>> {
    let s = app.session(&id).await?;
    let view = s.lock().await.view();
    Ok(Json(view))
}

async fn delete_session(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<StatusCode> {
    app.sessions
        .lock()
        .await
        .remove(&id)
        .map(|_| StatusCode::NO_CONTENT)
        .ok_or_else(|| ApiError::NotFound(format!("no session {id:?}")))
}

#[derive(Debug, Deserialize)]
pub struct ParamsUpdate {
    pub track: Option<TrackParams<f64>>,
    pub detect: Option<DetectParams<f64>>,
}

async fn set_params(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<ParamsUpdate>,
) -> ApiResult<Json<SessionView>> {
    let s = app.session(&id).await?;
    let mut s = s.lock().await;
    if let Some(t) = req.track {
        t.validate_for(s.volume.width(), s.volume.height())?;
        s.tunables.track = t;
    }
    if let Some(d) = req.detect {
        d.validate()?;
        s.tunables.detect = d;
    }
    Ok(Json(s.view()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SeedResponse {
    pub state: SessionState,
    pub keypoints: KeypointSet<f64>,
}

async fn submit_seed(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(mut seed): Json<SeedSpec<f64>>,
) -> ApiResult<Json<SeedResponse>> {
    let s = app.session(&id).await?;
    let mut s = s.lock().await;
    if let keytrack::SeedMode::Auto { detect, .. } = &mut seed.mode {
        // an auto seed without explicit parameters uses the session's
        if *detect == DetectParams::default() {
            *detect = s.tunables.detect;
        }
    }
    let keypoints = seed_keypoints(&s.volume, &seed)?;
    s.reseed(seed, keypoints.clone());
    Ok(Json(SeedResponse {
        state: s.state,
        keypoints,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrackResponse {
    pub state: SessionState,
    pub start_slice: usize,
    pub stop_up: usize,
    pub stop_down: usize,
    pub slices_with_mask: Vec<usize>,
}

async fn run_track(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<TrackResponse>> {
    let s = app.session(&id).await?;
    // held for the whole run: one tracking run at a time per session
    let mut s = s.lock().await;
    let Some(seed) = s.seed.clone() else {
        return Err(ApiError::Conflict(
            "session has no seed yet; submit keypoints or an roi first".into(),
        ));
    };
    let volume = s.volume.clone();
    let params = s.tunables.track;
    let result = tokio::task::spawn_blocking(move || segment(&volume, &seed, &params))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    let resp = TrackResponse {
        state: SessionState::Tracked,
        start_slice: result.start_slice,
        stop_up: result.stop_up,
        stop_down: result.stop_down,
        slices_with_mask: result.masks().map(|(i, _)| i).collect(),
    };
    s.result = Some(Arc::new(result));
    s.state = SessionState::Tracked;
    Ok(Json(resp))
}

async fn tracked_result(
    app: &AppState,
    id: &str,
) -> ApiResult<(Arc<SegmentationResult<f64>>, Arc<Volume64>, String)> {
    let s = app.session(id).await?;
    let s = s.lock().await;
    let r = s
        .result
        .clone()
        .ok_or_else(|| ApiError::Conflict("session has not been tracked".into()))?;
    Ok((r, s.volume.clone(), s.volume_name.clone()))
}

async fn slice_keypoints(
    State(app): State<Arc<AppState>>,
    UrlPath((id, index)): UrlPath<(String, usize)>,
) -> ApiResult<Json<KeypointSet<f64>>> {
    let s = app.session(&id).await?;
    let s = s.lock().await;
    if let Some(r) = &s.result {
        return r
            .per_slice
            .get(&index)
            .map(|p| Json(p.keypoints.clone()))
            .ok_or_else(|| ApiError::NotFound(format!("tracking did not reach slice {index}")));
    }
    match &s.seeds {
        Some(k) if k.slice_index == index => Ok(Json(k.clone())),
        _ => Err(ApiError::NotFound(format!("no keypoints on slice {index}"))),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HullResponse {
    pub slice_index: usize,
    pub vertices: Option<Vec<[f64; 2]>>,
}

async fn slice_hull(
    State(app): State<Arc<AppState>>,
    UrlPath((id, index)): UrlPath<(String, usize)>,
) -> ApiResult<Json<HullResponse>> {
    let (r, _, _) = tracked_result(&app, &id).await?;
    let prod = r
        .per_slice
        .get(&index)
        .ok_or_else(|| ApiError::NotFound(format!("tracking did not reach slice {index}")))?;
    Ok(Json(HullResponse {
        slice_index: index,
        vertices: prod
            .hull
            .as_ref()
            .map(|h| h.vertices.iter().map(|v| [v.x, v.y]).collect()),
    }))
}

async fn slice_mask(
    State(app): State<Arc<AppState>>,
    UrlPath((id, index)): UrlPath<(String, usize)>,
) -> ApiResult<Response> {
    let (r, _, _) = tracked_result(&app, &id).await?;
    let mask = r
        .mask(index)
        .ok_or_else(|| ApiError::NotFound(format!("no mask on slice {index}")))?;
    Ok(png(io::encode_mask_png(mask)))
}

/// Prediction color and opacity used for overlays.
const OVERLAY_RGB: [f64; 3] = [40.0, 110.0, 255.0];
const OVERLAY_ALPHA: f64 = 0.45;

async fn slice_overlay(
    State(app): State<Arc<AppState>>,
    UrlPath((id, index)): UrlPath<(String, usize)>,
) -> ApiResult<Response> {
    let (r, vol, _) = tracked_result(&app, &id).await?;
    let slice = vol
        .slice(index)
        .ok_or_else(|| ApiError::NotFound(format!("no slice {index}")))?;
    let gray = slice.to_u8();
    let mask = r.mask(index);
    let mut rgba = Vec::with_capacity(gray.len() * 4);
    for (i, g) in gray.iter().enumerate() {
        let on = mask.is_some_and(|m| m.bits()[i]);
        for c in OVERLAY_RGB {
            let v = if on {
                (1.0 - OVERLAY_ALPHA) * *g as f64 + OVERLAY_ALPHA * c
            } else {
                *g as f64
            };
            rgba.push(v.round() as u8);
        }
        rgba.push(255);
    }
    let img = image::RgbaImage::from_raw(slice.width() as u32, slice.height() as u32, rgba)
        .ok_or_else(|| ApiError::Internal("overlay buffer size".into()))?;
    Ok(png(encode_png(&img)?))
}

#[derive(Debug, Deserialize)]
pub struct MetricsQuery {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub include_empty: bool,
}

async fn session_metrics(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<MetricsQuery>,
) -> ApiResult<Json<MetricsReport>> {
    let (r, vol, name) = tracked_result(&app, &id).await?;
    let ann = app.volume_dir(&name)?.join("annotations");
    if !ann.is_dir() {
        return Err(ApiError::NotFound(format!(
            "volume {name} has no annotations"
        )));
    }
    let label = q.label.unwrap_or_else(|| "ring".into());
    let report = tokio::task::spawn_blocking(move || -> Result<MetricsReport, CoreError> {
        let truth =
            io::load_annotations(&ann, &label, vol.source_ids(), vol.width(), vol.height())?;
        evaluate(&r, &truth, q.include_empty)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(Json(report))
}

/// Serves until Ctrl-C.
pub async fn serve(
    root: &Path,
    bind: SocketAddr,
    load: LoadOptions,
    defaults: Tunables,
) -> anyhow::Result<()> {
    if !root.is_dir() {
        anyhow::bail!("volume root {} is not a readable directory", root.display());
    }
    let state = Arc::new(AppState::new(root, load, defaults));
    let listener = tokio::net::TcpListener::bind(bind).await?;
    log::info!(
        "serving {} on http://{}",
        root.display(),
        listener.local_addr()?
    );
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
