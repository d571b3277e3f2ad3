mod support {
    pub mod states;
}

use linkplot_core::plots::{build_plot_spec, PlotConfig, PlotSpec, PLOTSPEC_SCHEMA_VERSION};
use linkplot_core::table::{parse_csv, RowId};
use proptest::prelude::*;
use serde_json::{json, Value};
use support::states::random_state;

const SCHEMA: &str = include_str!("../../../docs/plotspec.schema.json");

fn schema() -> Value {
    serde_json::from_str(SCHEMA).unwrap()
}

fn resolve<'a>(root: &'a Value, s: &'a Value) -> &'a Value {
    match s.get("$ref").and_then(Value::as_str) {
        Some(r) => {
            let pointer = r.strip_prefix('#').expect("local reference");
            resolve(root, root.pointer(pointer).unwrap_or_else(|| panic!("dangling {r}")))
        }
        None => s,
    }
}

fn type_matches(name: &str, v: &Value) -> bool {
    match name {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64(),
        other => panic!("unsupported type {other}"),
    }
}

/// Checks `v` against the keyword subset the schema document uses.
fn check(root: &Value, s: &Value, v: &Value, path: &str) -> Result<(), String> {
    let s = resolve(root, s);
    let fail = |what: &str| Err(format!("{path}: {what} (got {v})"));
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(name) => type_matches(name, v),
            Value::Array(names) => names.iter().any(|n| type_matches(n.as_str().unwrap(), v)),
            _ => panic!("bad type keyword"),
        };
        if !ok {
            return fail(&format!("expected type {t}"));
        }
    }
    if let Some(c) = s.get("const") {
        if c != v {
            return fail(&format!("expected {c}"));
        }
    }
    if let Some(options) = s.get("enum").and_then(Value::as_array) {
        if !options.contains(v) {
            return fail("not in enum");
        }
    }
    if let (Some(min), Some(x)) = (s.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            return fail("below minimum");
        }
    }
    if let Some(any) = s.get("anyOf").and_then(Value::as_array) {
        if !any.iter().any(|alt| check(root, alt, v, path).is_ok()) {
            return fail("matches no alternative");
        }
    }
    if let Some(obj) = v.as_object() {
        if let Some(max) = s.get("maxProperties").and_then(Value::as_u64) {
            if obj.len() as u64 > max {
                return fail("too many properties");
            }
        }
        for key in s.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !obj.contains_key(key.as_str().unwrap()) {
                return fail(&format!("missing {key}"));
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (k, child) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(ps) => check(root, ps, child, &format!("{path}.{k}"))?,
                None if s.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return fail(&format!("unexpected property {k}"))
                }
                None => {}
            }
        }
    }
    if let Some(items) = v.as_array() {
        if let Some(n) = s.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < n {
                return fail("too few items");
            }
        }
        if let Some(n) = s.get("maxItems").and_then(Value::as_u64) {
            if items.len() as u64 > n {
                return fail("too many items");
            }
        }
        if let Some(is) = s.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(root, is, item, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

fn conforms(spec: &PlotSpec) -> Result<(), String> {
    let root = schema();
    let v = serde_json::to_value(spec).unwrap();
    check(&root, &root, &v, "spec")?;
    let kind = &root["$defs"]["kinds"][&spec.kind];
    if kind.is_null() {
        return Err(format!("kind {} is not documented", spec.kind));
    }
    check(&root, &kind["series"], &v["series"], "series")?;
    check(&root, &kind["encodings"], &v["encodings"], "encodings")
}

#[test]
fn document_version_matches_the_code() {
    let root = schema();
    assert_eq!(root["properties"]["schema_version"]["const"], json!(PLOTSPEC_SCHEMA_VERSION));
    let documented: Vec<&String> = root["$defs"]["kinds"].as_object().unwrap().keys().collect();
    for kind in linkplot_core::plots::BUILTIN_KINDS {
        assert!(documented.iter().any(|d| d.as_str() == kind.to_string()), "{kind} undocumented");
    }
}

#[test]
fn validator_rejects_wrong_shapes() {
    let t = parse_csv(b"x,y\n1,2\n3,4\n").unwrap();
    let config = PlotConfig::from_value(json!({"kind": "scatter", "x_column": "x", "y_column": "y"})).unwrap();
    let good = build_plot_spec(&t, "plot-1", &config, &Default::default()).unwrap();
    assert_eq!(conforms(&good), Ok(()));

    let mut bad = good.clone();
    bad.series["x"] = json!(["1"]);
    assert!(conforms(&bad).is_err());
    let mut bad = good.clone();
    bad.encodings["surprise"] = json!(1);
    assert!(conforms(&bad).is_err());
    let mut bad = good;
    bad.series.as_object_mut().unwrap().remove("row_ids");
    assert!(conforms(&bad).is_err());
}

#[test]
fn fixture_specs_conform() {
    let t = parse_csv(include_bytes!("fixtures/molecules50.csv")).unwrap();
    let mut state = linkplot_core::plots::InteractionState::default();
    state.hovered = Some(RowId(3));
    for config in [
        json!({"kind": "scatter", "x_column": "emb_x", "y_column": "emb_y", "color_by": "logp", "symbol_by": "series"}),
        json!({"kind": "scatter", "x_column": "emb_x", "y_column": "emb_y", "color_by": "series"}),
        json!({"kind": "histogram", "column": "logp", "split_by_cluster": true}),
        json!({"kind": "heatmap", "x_column": "emb_x", "y_column": "logp"}),
        json!({"kind": "barplot", "value_column": "logp", "group_by": "series", "aggregate": "mean"}),
        json!({"kind": "table", "page_size": 7, "page": 2, "sort_column": "name"}),
        json!({"kind": "smiles", "smiles_column": "smiles"}),
        json!({"kind": "smiles", "smiles_column": "name"}),
    ] {
        let config = PlotConfig::from_value(config.clone()).unwrap();
        let spec = build_plot_spec(&t, "plot-1", &config, &state).unwrap();
        assert_eq!(conforms(&spec), Ok(()), "{spec:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn built_specs_conform(seed in any::<u64>()) {
        let s = random_state(seed);
        for p in &s.plots {
            let spec = build_plot_spec(&s.table, &p.plot_id, &p.config, &s.interaction).unwrap();
            prop_assert_eq!(conforms(&spec), Ok(()));
        }
    }
}
