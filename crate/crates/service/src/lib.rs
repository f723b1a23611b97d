//! HTTP front end for a model family artifact.
//!
//! All evaluations are read from the artifact; the service never runs a
//! classifier. The only mutable state is the selection log.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/api/metadata` | dataset descriptor, attribute, threshold grid |
//! | GET | `/api/frontier?attribute=A&threshold=T` | Pareto points, ascending disparity |
//! | GET | `/api/evaluation?model=M&threshold=T[&attribute=A]` | confusion counts |
//! | POST | `/api/selection` | append a selection, returns its sequence number |
//! | GET | `/` | explorer UI |

pub mod api;
mod error;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tradeoff_core::artifact::{ModelFamilyArtifact, SelectionLog};

pub use error::ApiError;

pub struct AppState {
    pub artifact: ModelFamilyArtifact,
    pub log: SelectionLog,
    /// Directory holding the built explorer UI (`index.html` and assets).
    pub ui_dir: Option<PathBuf>,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    pub fn new(artifact: ModelFamilyArtifact, log: SelectionLog, ui_dir: Option<PathBuf>) -> SharedState {
        Arc::new(AppState {
            artifact,
            log,
            ui_dir,
        })
    }
}

type Params = Query<HashMap<String, String>>;

fn param<'a>(q: &'a HashMap<String, String>, name: &str) -> Option<&'a str> {
    q.get(name).map(String::as_str)
}

async fn get_metadata(State(state): State<SharedState>) -> Json<api::MetadataDoc> {
    Json(api::metadata(&state.artifact))
}

async fn get_frontier(
    State(state): State<SharedState>,
    Query(q): Params,
) -> Result<Json<api::FrontierDoc>, ApiError> {
    api::frontier(&state.artifact, param(&q, "attribute"), param(&q, "threshold")).map(Json)
}

async fn get_evaluation(
    State(state): State<SharedState>,
    Query(q): Params,
) -> Result<Json<api::EvaluationResponse>, ApiError> {
    api::evaluation(
        &state.artifact,
        param(&q, "model"),
        param(&q, "threshold"),
        param(&q, "attribute"),
    )
    .map(Json)
}

async fn post_selection(
    State(state): State<SharedState>,
    body: Bytes,
) -> Result<(StatusCode, Json<api::SelectionAck>), ApiError> {
    let now = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
    let ack = tokio::task::spawn_blocking(move || {
        api::post_selection(&state.artifact, &state.log, &body, now)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(ack)))
}

const PLACEHOLDER: &str = "<!doctype html>
<html><head><meta charset=\"utf-8\"><title>Model trade-off explorer</title></head>
<body>
<h1>Model trade-off explorer</h1>
<p>The explorer UI is not installed. Start the server with <code>--ui-dir</code> pointing at the built assets.</p>
<ul>
<li><a href=\"/api/metadata\">/api/metadata</a></li>
<li>/api/frontier?attribute=&hellip;&amp;threshold=&hellip;</li>
<li>/api/evaluation?model=&hellip;&amp;threshold=&hellip;[&amp;attribute=&hellip;]</li>
<li>POST /api/selection</li>
</ul>
</body></html>
";

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript; charset=utf-8",
        Some("css") => "text/css; charset=utf-8",
        Some("json" | "map") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("ico") => "image/x-icon",
        Some("woff2") => "font/woff2",
        _ => "application/octet-stream",
    }
}

async fn serve_file(root: &Path, relative: &str) -> Response {
    let rel = Path::new(relative);
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return ApiError::not_found(format!("no asset `{relative}`")).into_response();
    }
    let path = root.join(rel);
    match tokio::fs::read(&path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response(),
        Err(_) => ApiError::not_found(format!("no asset `{relative}`")).into_response(),
    }
}

async fn index(State(state): State<SharedState>) -> Response {
    match &state.ui_dir {
        Some(dir) => serve_file(dir, "index.html").await,
        None => Html(PLACEHOLDER).into_response(),
    }
}

async fn asset(State(state): State<SharedState>, axum::extract::Path(path): axum::extract::Path<String>) -> Response {
    match &state.ui_dir {
        Some(dir) => serve_file(dir, &path).await,
        None => ApiError::not_found("the explorer UI is not installed").into_response(),
    }
}

async fn fallback() -> ApiError {
    ApiError::not_found("no such endpoint")
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/api/metadata", get(get_metadata))
        .route("/api/frontier", get(get_frontier))
        .route("/api/evaluation", get(get_evaluation))
        .route("/api/selection", post(post_selection))
        .route("/", get(index))
        .route("/{*path}", get(asset))
        .fallback(fallback)
        .with_state(state)
}

/// Bind `addr` and serve until the process is stopped.
pub async fn serve(state: SharedState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
