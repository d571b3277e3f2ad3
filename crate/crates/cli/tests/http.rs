use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use linkplot::{build_registry, discover_manifests, initial_state, render, router};
use linkplot_core::engine::SessionHost;
use linkplot_core::session::SessionState;
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("linkplot-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn app(static_dir: Option<PathBuf>) -> axum::Router {
    let registry = build_registry(&[]).unwrap();
    let state = initial_state(&registry, Some(&fixture("molecules50.csv")), None).unwrap();
    router(Arc::new(SessionHost::new(Arc::new(registry), state)), static_dir)
}

async fn post(app: &axum::Router, body: impl Into<Body>) -> (StatusCode, Value) {
    let response = app
        .clone()
        .oneshot(
            Request::post("/api/message")
                .header("content-type", "application/json")
                .body(body.into())
                .unwrap(),
        )
        .await
        .unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

#[tokio::test]
async fn message_round_trip() {
    let app = app(None);
    let (status, r) = post(
        &app,
        json!({"kind": "event", "request_id": "a1", "event": {"type": "add_plot", "config": {"kind": "scatter", "x_column": "emb_x", "y_column": "emb_y"}}}).to_string(),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(r["ok"], true);
    assert_eq!(r["request_id"], "a1");
    assert_eq!(r["updates"][0]["spec"]["kind"], "scatter");

    let (_, r) = post(&app, json!({"kind": "get_plot_spec", "plot_id": "plot-1"}).to_string()).await;
    assert_eq!(r["spec"]["plot_id"], "plot-1");
    let (_, r) = post(&app, json!({"kind": "list_plot_kinds"}).to_string()).await;
    let kinds: Vec<&str> = r["kinds"].as_array().unwrap().iter().filter_map(|k| k["kind"].as_str()).collect();
    assert!(kinds.contains(&"violin"), "{kinds:?}");
}

#[tokio::test]
async fn malformed_bodies_are_answered_in_band() {
    let app = app(None);
    for body in [&b"not json"[..], b"", b"{\"kind\": 3}", b"\xff\xfe"] {
        let (status, r) = post(&app, body.to_vec()).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(r["ok"], false);
        assert_eq!(r["error"]["code"], "bad_request");
    }
}

#[tokio::test]
async fn health_and_index() {
    let app = app(None);
    let r = app.clone().oneshot(Request::get("/healthz").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    let r = app.oneshot(Request::get("/").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    let body = r.into_body().collect().await.unwrap().to_bytes();
    assert!(std::str::from_utf8(&body).unwrap().contains("/api/message"));
}

#[tokio::test]
async fn static_assets_are_served_without_escaping_the_root() {
    let dir = scratch("static");
    std::fs::write(dir.join("index.html"), "<html>ui</html>").unwrap();
    std::fs::write(dir.join("app.js"), "console.log(1)").unwrap();
    let app = app(Some(dir.clone()));
    let r = app.clone().oneshot(Request::get("/").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    let r = app.clone().oneshot(Request::get("/app.js").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(r.headers()["content-type"], "text/javascript; charset=utf-8");
    let r = app.clone().oneshot(Request::get("/../Cargo.toml").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(r.status(), StatusCode::NOT_FOUND);
    let r = app.oneshot(Request::get("/healthz").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(r.status(), StatusCode::OK);
}

#[test]
fn plugin_directories_are_scanned() {
    let dir = scratch("plugins");
    let manifest = json!({
        "plugin_name": "strip",
        "plot_kinds": [{"kind": "strip", "builder": "violin.build", "schema": [
            {"name": "column", "type": "column", "kinds": ["numeric"], "required": true}
        ]}],
        "requires": ["no.such.capability"]
    });
    std::fs::write(dir.join("strip.plugin.json"), manifest.to_string()).unwrap();
    std::fs::write(dir.join("readme.txt"), "ignored").unwrap();
    assert_eq!(discover_manifests(&dir).unwrap(), [dir.join("strip.plugin.json")]);

    let registry = build_registry(&[dir.clone()]).unwrap();
    let strip = registry.plugins().iter().find(|p| p.plugin_name == "strip").unwrap();
    assert!(!strip.enabled);
    assert!(strip.reason.as_deref().unwrap().contains("no.such.capability"));
    assert!(!registry.list_kinds().iter().any(|k| k.kind == "strip"));

    std::fs::write(dir.join("again.plugin.json"), linkplot_violin::MANIFEST).unwrap();
    assert!(build_registry(&[dir]).is_err());
}

#[test]
fn render_writes_specs_and_svgs() {
    let registry = build_registry(&[]).unwrap();
    let raw = std::fs::read(fixture("session_v1.xsession.json")).unwrap();
    let mut state: SessionState = linkplot_core::session::load_session_with(&raw, &registry).unwrap();
    // The stored hover points at a row without a molecule; move it to benzene.
    state.interaction.hovered = Some(linkplot_core::table::RowId(11));
    let out = scratch("render");
    let written = render(&registry, &state, &out).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["plot-1.json", "plot-2.json", "plot-3.json", "plot-3.svg"]);
    let svg = std::fs::read_to_string(out.join("plot-3.svg")).unwrap();
    assert!(svg.contains("<title>c1ccccc1</title>"), "{svg}");
    let spec: Value = serde_json::from_slice(&std::fs::read(out.join("plot-3.json")).unwrap()).unwrap();
    assert_eq!(spec["series"]["svg"], svg.as_str());
}
