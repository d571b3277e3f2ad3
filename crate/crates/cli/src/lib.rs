//! Server and batch entry points shared by the `linkplot` binary and its tests.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use axum::body::Bytes;
use axum::http::{header, StatusCode, Uri};
use axum::response::{Html, IntoResponse};
use axum::routing::{get, post};
use axum::{Json, Router};
use linkplot_core::engine::{ingest_table, CapabilityFlags, DataFormat, PluginManifest, PluginRegistry, SessionHost};
use linkplot_core::session::{load_session_with, SessionState};
use serde_json::Value;

pub const MANIFEST_SUFFIX: &str = ".plugin.json";

const FALLBACK_INDEX: &str = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>linkplot</title></head>\
<body><p>linkplot engine is running. No UI bundle was configured; pass <code>--static-dir</code> to serve one.</p>\
<p>Protocol endpoint: <code>POST /api/message</code></p></body></html>\n";

/// Built-ins plus the bundled violin plugin plus every `*.plugin.json` in `plugin_dirs`.
pub fn build_registry(plugin_dirs: &[PathBuf]) -> Result<PluginRegistry> {
    let mut registry = PluginRegistry::new(CapabilityFlags::detect(), linkplot_violin::hooks());
    registry = registry.register(linkplot_violin::manifest())?;
    for dir in plugin_dirs {
        for path in discover_manifests(dir)? {
            let raw = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let manifest = PluginManifest::from_json(&raw).with_context(|| format!("in {}", path.display()))?;
            registry = registry
                .register(manifest)
                .with_context(|| format!("registering {}", path.display()))?;
        }
    }
    Ok(registry)
}

/// Manifest files directly inside `dir`, sorted by file name.
pub fn discover_manifests(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let is_manifest = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with(MANIFEST_SUFFIX));
        if is_manifest && path.is_file() {
            found.push(path);
        }
    }
    found.sort();
    Ok(found)
}

pub fn format_for(path: &Path) -> Result<DataFormat> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default().to_ascii_lowercase();
    match ext.as_str() {
        "csv" => Ok(DataFormat::Csv),
        "tsv" | "tab" => Ok(DataFormat::Tsv),
        "json" => Ok(DataFormat::Json),
        _ => bail!("cannot infer data format from `{}`", path.display()),
    }
}

/// Initial state for `serve`: a session file wins over a data file.
pub fn initial_state(registry: &PluginRegistry, data: Option<&Path>, session: Option<&Path>) -> Result<SessionState> {
    if let Some(path) = session {
        return read_session(registry, path);
    }
    let Some(path) = data else {
        return Ok(SessionState::default());
    };
    let raw = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let table = ingest_table(&raw, format_for(path)?, registry).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok(SessionState {
        table,
        ..Default::default()
    })
}

pub fn read_session(registry: &PluginRegistry, path: &Path) -> Result<SessionState> {
    let raw = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_session_with(&raw, registry).map_err(|e| anyhow!("{}: {e}", path.display()))
}

pub fn router(host: Arc<SessionHost>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/message", post(message))
        .route("/healthz", get(|| async { "ok" }))
        .with_state(host);
    match static_dir {
        Some(dir) => {
            let dir = Arc::new(dir);
            api.fallback(get(move |uri: Uri| serve_static(dir.clone(), uri)))
        }
        None => api.route("/", get(|| async { Html(FALLBACK_INDEX) })),
    }
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).unwrap_or_default() {
        "html" => "text/html; charset=utf-8",
        "js" | "mjs" => "text/javascript; charset=utf-8",
        "css" => "text/css; charset=utf-8",
        "json" | "map" => "application/json",
        "svg" => "image/svg+xml",
        "png" => "image/png",
        "wasm" => "application/wasm",
        "ico" => "image/x-icon",
        _ => "application/octet-stream",
    }
}

async fn serve_static(root: Arc<PathBuf>, uri: Uri) -> axum::response::Response {
    let mut path = root.as_ref().clone();
    for part in uri.path().split('/').filter(|p| !p.is_empty()) {
        if part == ".." || part.contains('\\') {
            return StatusCode::NOT_FOUND.into_response();
        }
        path.push(part);
    }
    if path.is_dir() {
        path.push("index.html");
    }
    match tokio::fs::read(&path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response(),
        Err(_) => StatusCode::NOT_FOUND.into_response(),
    }
}

async fn message(axum::extract::State(host): axum::extract::State<Arc<SessionHost>>, body: Bytes) -> impl IntoResponse {
    let response: Value = tokio::task::spawn_blocking(move || host.handle(&body))
        .await
        .unwrap_or_else(|e| serde_json::json!({"ok": false, "error": {"code": "internal", "message": e.to_string()}}));
    ([(header::CACHE_CONTROL, "no-store")], Json(response))
}

/// Writes `<plot_id>.json` for every plot and `<plot_id>.svg` for molecule plots that carry one.
pub fn render(registry: &PluginRegistry, state: &SessionState, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    for plot in &state.plots {
        let spec = registry
            .build_spec(&state.table, &plot.plot_id, &plot.config, &state.interaction)
            .with_context(|| format!("plot {}", plot.plot_id))?;
        let value = serde_json::to_value(&spec)?;
        let json_path = out.join(format!("{}.json", plot.plot_id));
        std::fs::write(&json_path, serde_json::to_string_pretty(&value)? + "\n")?;
        written.push(json_path);
        if let Some(svg) = value["series"]["svg"].as_str() {
            let svg_path = out.join(format!("{}.svg", plot.plot_id));
            std::fs::write(&svg_path, svg)?;
            written.push(svg_path);
        }
    }
    Ok(written)
}
