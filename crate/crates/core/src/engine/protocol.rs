use std::panic::{catch_unwind, AssertUnwindSafe};

use serde_json::{json, Value};

use super::{dispatch, Event, PluginRegistry, TableSummary};
use crate::session::{SessionState, SESSION_SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    BadRequest,
    UnknownPlot,
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::BadRequest => "bad_request",
            ErrorCode::UnknownPlot => "unknown_plot",
            ErrorCode::Internal => "internal",
        }
    }
}

fn error(code: ErrorCode, message: impl Into<String>) -> Value {
    json!({"ok": false, "error": {"code": code.as_str(), "message": message.into()}})
}

pub fn state_summary(state: &SessionState, registry: &PluginRegistry) -> Value {
    json!({
        "schema_version": SESSION_SCHEMA_VERSION,
        "table": TableSummary::of(&state.table),
        "plots": state
            .plots
            .iter()
            .map(|p| json!({"plot_id": p.plot_id, "kind": p.config.kind(), "config": p.config}))
            .collect::<Vec<_>>(),
        "interaction": state.interaction,
        "capabilities": registry.capabilities(),
    })
}

/// Handles one protocol document. Always produces a response; failures are
/// reported in-band with a stable error code. A `request_id` in the request
/// is echoed back.
pub fn handle_message(state: &SessionState, registry: &PluginRegistry, raw: &[u8]) -> (SessionState, Value) {
    let request: Value = match serde_json::from_slice(raw) {
        Ok(v) => v,
        Err(e) => return (state.clone(), error(ErrorCode::BadRequest, format!("invalid JSON: {e}"))),
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| route(state, registry, &request)));
    let (next, mut response) = match outcome {
        Ok(r) => r,
        Err(_) => (state.clone(), error(ErrorCode::Internal, "request handler panicked")),
    };
    if let (Some(id), Some(obj)) = (request.get("request_id"), response.as_object_mut()) {
        obj.insert("request_id".into(), id.clone());
    }
    (next, response)
}

fn route(state: &SessionState, registry: &PluginRegistry, request: &Value) -> (SessionState, Value) {
    let unchanged = |v: Value| (state.clone(), v);
    let Some(kind) = request.get("kind").and_then(Value::as_str) else {
        return unchanged(error(ErrorCode::BadRequest, "request needs a string `kind`"));
    };
    match kind {
        "event" => {
            let Some(raw_event) = request.get("event") else {
                return unchanged(error(ErrorCode::BadRequest, "missing `event`"));
            };
            let event: Event = match serde_json::from_value(raw_event.clone()) {
                Ok(e) => e,
                Err(e) => return unchanged(error(ErrorCode::BadRequest, format!("malformed event: {e}"))),
            };
            let (next, updates) = dispatch(state, &event, registry);
            (next, json!({"ok": true, "updates": updates}))
        }
        "get_state_summary" => unchanged(json!({"ok": true, "summary": state_summary(state, registry)})),
        "list_plot_kinds" => unchanged(json!({
            "ok": true,
            "kinds": registry.list_kinds(),
            "plugins": registry.plugins(),
        })),
        "get_plot_spec" => {
            let Some(plot_id) = request.get("plot_id").and_then(Value::as_str) else {
                return unchanged(error(ErrorCode::BadRequest, "missing string `plot_id`"));
            };
            let Some(plot) = state.plot(plot_id) else {
                return unchanged(error(ErrorCode::UnknownPlot, format!("no plot `{plot_id}`")));
            };
            match registry.build_spec(&state.table, plot_id, &plot.config, &state.interaction) {
                Ok(spec) => unchanged(json!({"ok": true, "spec": spec})),
                Err(e) => unchanged(error(ErrorCode::Internal, e.to_string())),
            }
        }
        other => unchanged(error(ErrorCode::BadRequest, format!("unknown request kind `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(state: &SessionState, body: Value) -> (SessionState, Value) {
        handle_message(state, &PluginRegistry::default(), body.to_string().as_bytes())
    }

    #[test]
    fn lists_builtins() {
        let (_, r) = call(&SessionState::default(), json!({"kind": "list_plot_kinds"}));
        let kinds: Vec<&str> = r["kinds"].as_array().unwrap().iter().map(|k| k["kind"].as_str().unwrap()).collect();
        assert_eq!(kinds, ["scatter", "histogram", "heatmap", "barplot", "table", "smiles"]);
    }

    #[test]
    fn malformed_requests() {
        let s = SessionState::default();
        let (_, r) = call(&s, json!({"kind": "event", "event": {"type": "warp"}}));
        assert_eq!(r["error"]["code"], "bad_request");
        let (_, r) = handle_message(&s, &PluginRegistry::default(), b"\xff\x00");
        assert_eq!(r["error"]["code"], "bad_request");
        let (_, r) = call(&s, json!({"kind": "get_plot_spec", "plot_id": "plot-1", "request_id": 7}));
        assert_eq!(r["error"]["code"], "unknown_plot");
        assert_eq!(r["request_id"], 7);
    }

    #[test]
    fn add_plot_then_summary() {
        let table = crate::table::parse_csv(b"a,b\n1,2\n").unwrap();
        let s = SessionState {
            table,
            ..Default::default()
        };
        let (s, r) = call(
            &s,
            json!({"kind": "event", "event": {"type": "add_plot", "config": {"kind": "scatter", "x_column": "a", "y_column": "b"}}}),
        );
        assert_eq!(r["ok"], true);
        assert_eq!(r["updates"][0]["type"], "plot_spec_changed");
        let (_, r) = call(&s, json!({"kind": "get_state_summary"}));
        assert_eq!(r["summary"]["plots"][0]["plot_id"], "plot-1");
    }
}
