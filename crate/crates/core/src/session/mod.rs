//! Session files: the whole application state as one JSON document.
//!
//! Output is canonical (sorted keys, no whitespace, shortest round-trip
//! float formatting), so saving the same state twice gives identical bytes.
//! Loading validates everything and rejects rather than repairs.

use std::collections::HashSet;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::plots::{Builtins, ConfigValidator, InteractionState, PlotConfig};
use crate::table::{AuxColumn, AuxOrigin, Column, ColumnData, ColumnKind, RowId, Table};

pub const SESSION_SCHEMA_VERSION: u64 = 1;
pub const SESSION_EXTENSION: &str = ".xsession.json";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("malformed session document: {0}")]
    MalformedDocument(String),
    #[error("unsupported session schema version {0}")]
    UnsupportedVersion(u64),
    #[error("{path}: {description}")]
    InvariantViolation { description: String, path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotInstance {
    pub plot_id: String,
    pub config: PlotConfig,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SessionState {
    pub table: Table,
    pub plots: Vec<PlotInstance>,
    pub interaction: InteractionState,
}

impl SessionState {
    pub fn plot(&self, plot_id: &str) -> Option<&PlotInstance> {
        self.plots.iter().find(|p| p.plot_id == plot_id)
    }

    /// Checks every state invariant; `validator` decides which plot kinds exist.
    pub fn validate(&self, validator: &dyn ConfigValidator) -> Result<(), SessionError> {
        let mut ids = HashSet::new();
        for (i, p) in self.plots.iter().enumerate() {
            let path = format!("plots[{i}]");
            if p.plot_id.is_empty() {
                return Err(violation("empty plot id", format!("{path}.plot_id")));
            }
            if !ids.insert(p.plot_id.as_str()) {
                return Err(violation(
                    format!("duplicate plot id `{}`", p.plot_id),
                    format!("{path}.plot_id"),
                ));
            }
            validator.validate(&p.config, &self.table).map_err(|e| {
                violation(format!("plot `{}`: {e}", p.plot_id), format!("{path}.config"))
            })?;
        }
        for aux in self.table.aux_columns() {
            if aux.origin == AuxOrigin::Cluster {
                check_cluster_labels(aux)?;
            }
        }
        let state = &self.interaction;
        if let Some(name) = &state.active_cluster_column {
            match self.table.column(name) {
                Some(c) if c.kind() == ColumnKind::Categorical => {}
                Some(_) => {
                    return Err(violation(
                        format!("active cluster column `{name}` is not categorical"),
                        "interaction.active_cluster_column",
                    ))
                }
                None => {
                    return Err(violation(
                        format!("active cluster column `{name}` does not exist"),
                        "interaction.active_cluster_column",
                    ))
                }
            }
        }
        for id in &state.selection {
            if self.table.row_index(*id).is_none() {
                return Err(violation(format!("selected row {id} does not exist"), "interaction.selection"));
            }
        }
        if let Some(id) = state.hovered {
            if self.table.row_index(id).is_none() {
                return Err(violation(format!("hovered row {id} does not exist"), "interaction.hovered"));
            }
        }
        Ok(())
    }
}

fn check_cluster_labels(aux: &AuxColumn) -> Result<(), SessionError> {
    let ok = aux
        .column
        .categories()
        .is_some_and(|cats| cats.iter().enumerate().all(|(i, c)| *c == format!("c{}", i + 1)));
    if ok {
        Ok(())
    } else {
        Err(violation(
            format!("cluster column `{}` must be labelled c1..ck", aux.name()),
            format!("table.aux.{}", aux.name()),
        ))
    }
}

fn violation(description: impl Into<String>, path: impl Into<String>) -> SessionError {
    SessionError::InvariantViolation {
        description: description.into(),
        path: path.into(),
    }
}

fn malformed(msg: impl Into<String>) -> SessionError {
    SessionError::MalformedDocument(msg.into())
}

fn column_json(c: &Column) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("name".into(), json!(c.name()));
    m.insert("kind".into(), json!(c.kind()));
    let values: Vec<Value> = c.cells().map(|cell| cell.to_json()).collect();
    m.insert("values".into(), Value::Array(values));
    if let Some(cats) = c.categories() {
        m.insert("categories".into(), json!(cats));
    }
    m
}

pub fn session_to_value(state: &SessionState) -> Value {
    let t = &state.table;
    let columns: Vec<Value> = t.dataset_columns().iter().map(|c| Value::Object(column_json(c))).collect();
    let aux: Vec<Value> = t
        .aux_columns()
        .map(|a| {
            let mut m = column_json(&a.column);
            m.insert("origin".into(), json!(a.origin));
            Value::Object(m)
        })
        .collect();
    json!({
        "schema_version": SESSION_SCHEMA_VERSION,
        "table": {"row_ids": t.row_ids(), "columns": columns, "aux": aux},
        "plots": state
            .plots
            .iter()
            .map(|p| json!({"plot_id": p.plot_id, "config": p.config}))
            .collect::<Vec<_>>(),
        "interaction": state.interaction,
    })
}

/// Serialises `value` with object keys sorted and no insignificant whitespace.
pub fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("strings serialize"));
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(v, out);
            }
            out.push(']');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("scalars serialize")),
    }
}

pub fn save_session(state: &SessionState) -> Vec<u8> {
    let mut out = String::new();
    write_canonical(&session_to_value(state), &mut out);
    out.into_bytes()
}

/// Loads a session that uses built-in plot kinds only.
pub fn load_session(raw: &[u8]) -> Result<SessionState, SessionError> {
    load_session_with(raw, &Builtins)
}

pub fn load_session_with(raw: &[u8], validator: &dyn ConfigValidator) -> Result<SessionState, SessionError> {
    let doc: Value = serde_json::from_slice(raw).map_err(|e| malformed(e.to_string()))?;
    let root = doc.as_object().ok_or_else(|| malformed("document is not an object"))?;
    let version = root
        .get("schema_version")
        .ok_or_else(|| malformed("missing schema_version"))?
        .as_u64()
        .ok_or_else(|| malformed("schema_version is not a nonnegative integer"))?;
    if version != SESSION_SCHEMA_VERSION {
        return Err(SessionError::UnsupportedVersion(version));
    }
    for key in root.keys() {
        if !["schema_version", "table", "plots", "interaction"].contains(&key.as_str()) {
            return Err(malformed(format!("unknown top-level key `{key}`")));
        }
    }
    let table = read_table(field(root, "table", "")?)?;

    let plots_raw = field(root, "plots", "")?
        .as_array()
        .ok_or_else(|| malformed("plots is not an array"))?;
    let mut plots = Vec::with_capacity(plots_raw.len());
    for (i, p) in plots_raw.iter().enumerate() {
        let path = format!("plots[{i}]");
        let obj = p.as_object().ok_or_else(|| malformed(format!("{path} is not an object")))?;
        let plot_id = field(obj, "plot_id", &path)?
            .as_str()
            .ok_or_else(|| malformed(format!("{path}.plot_id is not a string")))?
            .to_string();
        let config = PlotConfig::from_value(field(obj, "config", &path)?.clone())
            .map_err(|e| violation(format!("plot `{plot_id}`: {e}"), format!("{path}.config")))?;
        plots.push(PlotInstance { plot_id, config });
    }

    let interaction: InteractionState = serde_json::from_value(field(root, "interaction", "")?.clone())
        .map_err(|e| malformed(format!("interaction: {e}")))?;

    let state = SessionState {
        table,
        plots,
        interaction,
    };
    state.validate(validator)?;
    Ok(state)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, SessionError> {
    obj.get(key).ok_or_else(|| {
        if path.is_empty() {
            malformed(format!("missing `{key}`"))
        } else {
            malformed(format!("{path}: missing `{key}`"))
        }
    })
}

fn read_table(v: &Value) -> Result<Table, SessionError> {
    let obj = v.as_object().ok_or_else(|| malformed("table is not an object"))?;
    let row_ids: Vec<RowId> = serde_json::from_value(field(obj, "row_ids", "table")?.clone())
        .map_err(|e| malformed(format!("table.row_ids: {e}")))?;
    let arr = |key: &str| -> Result<&Vec<Value>, SessionError> {
        field(obj, key, "table")?
            .as_array()
            .ok_or_else(|| malformed(format!("table.{key} is not an array")))
    };
    let mut columns = Vec::new();
    for (i, c) in arr("columns")?.iter().enumerate() {
        columns.push(read_column(c, &format!("table.columns[{i}]"))?.0);
    }
    let mut aux = Vec::new();
    for (i, c) in arr("aux")?.iter().enumerate() {
        let path = format!("table.aux[{i}]");
        let (column, origin) = read_column(c, &path)?;
        let origin = origin.ok_or_else(|| malformed(format!("{path}: missing `origin`")))?;
        aux.push(AuxColumn::new(origin, column));
    }
    Table::new(row_ids, columns, aux).map_err(|e| violation(e.to_string(), "table"))
}

fn read_column(v: &Value, path: &str) -> Result<(Column, Option<AuxOrigin>), SessionError> {
    let obj = v.as_object().ok_or_else(|| malformed(format!("{path} is not an object")))?;
    for key in obj.keys() {
        if !["name", "kind", "values", "categories", "origin"].contains(&key.as_str()) {
            return Err(malformed(format!("{path}: unknown key `{key}`")));
        }
    }
    let name = field(obj, "name", path)?
        .as_str()
        .ok_or_else(|| malformed(format!("{path}.name is not a string")))?
        .to_string();
    let kind: ColumnKind = serde_json::from_value(field(obj, "kind", path)?.clone())
        .map_err(|e| malformed(format!("{path}.kind: {e}")))?;
    let origin = match obj.get("origin") {
        None => None,
        Some(o) => Some(
            serde_json::from_value::<AuxOrigin>(o.clone()).map_err(|e| malformed(format!("{path}.origin: {e}")))?,
        ),
    };
    let values = field(obj, "values", path)?
        .as_array()
        .ok_or_else(|| malformed(format!("{path}.values is not an array")))?;
    let bad_cell = |i: usize, what: &str| malformed(format!("{path}.values[{i}] is not {what}"));
    let column = match kind {
        ColumnKind::Numeric => {
            let mut out = Vec::with_capacity(values.len());
            for (i, v) in values.iter().enumerate() {
                out.push(match v {
                    Value::Null => None,
                    Value::Number(n) => Some(n.as_f64().ok_or_else(|| bad_cell(i, "a number"))?),
                    _ => return Err(bad_cell(i, "a number or null")),
                });
            }
            Column::numeric(name, out)
        }
        ColumnKind::Text => {
            let mut out = Vec::with_capacity(values.len());
            for (i, v) in values.iter().enumerate() {
                out.push(match v {
                    Value::Null => None,
                    Value::String(s) => Some(s.clone()),
                    _ => return Err(bad_cell(i, "a string or null")),
                });
            }
            Column::text(name, out)
        }
        ColumnKind::Categorical => {
            let categories: Vec<String> = serde_json::from_value(field(obj, "categories", path)?.clone())
                .map_err(|e| malformed(format!("{path}.categories: {e}")))?;
            let mut seen = HashSet::new();
            if let Some(dup) = categories.iter().find(|c| !seen.insert(c.as_str())) {
                return Err(violation(format!("duplicate category `{dup}`"), format!("{path}.categories")));
            }
            let mut codes = Vec::with_capacity(values.len());
            for (i, v) in values.iter().enumerate() {
                codes.push(match v {
                    Value::Null => None,
                    Value::String(s) => Some(categories.iter().position(|c| c == s).ok_or_else(|| {
                        violation(format!("label `{s}` is not a declared category"), format!("{path}.values[{i}]"))
                    })? as u32),
                    _ => return Err(bad_cell(i, "a string or null")),
                });
            }
            Column::categorical_with_dictionary(name, categories, codes)
                .ok_or_else(|| violation("invalid category codes", path.to_string()))?
        }
    };
    if kind != ColumnKind::Categorical && obj.contains_key("categories") {
        return Err(malformed(format!("{path}: `categories` only applies to categorical columns")));
    }
    debug_assert!(matches!(
        (kind, column.data()),
        (ColumnKind::Numeric, ColumnData::Numeric(_))
            | (ColumnKind::Categorical, ColumnData::Categorical { .. })
            | (ColumnKind::Text, ColumnData::Text(_))
    ));
    Ok((column, origin))
}
