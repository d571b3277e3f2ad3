//! Session state machine: events in, updates out.
//!
//! [`dispatch`] is a pure function of the current state, the event and the
//! plugin registry. A failing event yields a single `state_error` update and
//! returns the state unchanged.

mod host;
mod protocol;
mod registry;

use std::collections::BTreeSet;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analytics::{kmeans, lasso_select, pca2, Polygon};
use crate::matrix::Matrix;
use crate::plots::{Channel, ConfigValidator, PlotConfig, PlotSpec};
use crate::session::{load_session_with, save_session, PlotInstance, SessionState};
use crate::table::{AuxColumn, AuxOrigin, Column, ColumnKind, RowId, Table};

pub use self::host::SessionHost;
pub use self::protocol::{handle_message, state_summary, ErrorCode};
pub use self::registry::{
    AnalyticsDecl, AnalyticsHook, CapabilityFlags, HookTable, KindInfo, PlotBody, PlotHook, PlotKindDecl,
    PluginManifest, PluginRegistry, PluginStatus, RegistryError, CAP_CSV, CAP_EXTENDED_FORMATS, CAP_SVG,
};

/// Name requested for cluster columns created by k-means or lasso.
pub const CLUSTER_COLUMN: &str = "cluster";
pub const PCA_COLUMNS: [&str; 2] = ["PC1", "PC2"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    #[default]
    Csv,
    Tsv,
    Json,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Event {
    HoverPoint {
        row_id: Option<RowId>,
    },
    SelectionSet {
        row_ids: BTreeSet<RowId>,
    },
    LassoDrawn {
        source_plot_id: String,
        polygon: Polygon,
    },
    #[serde(rename = "run_kmeans")]
    RunKMeans {
        columns: Vec<String>,
        k: usize,
        seed: u64,
        #[serde(default, skip_serializing_if = "is_false")]
        standardize: bool,
    },
    #[serde(rename = "run_pca")]
    RunPca {
        columns: Vec<String>,
        #[serde(default, skip_serializing_if = "is_false")]
        standardize: bool,
    },
    AddPlot {
        config: PlotConfig,
    },
    RemovePlot {
        plot_id: String,
    },
    UpdatePlotConfig {
        plot_id: String,
        config: PlotConfig,
    },
    /// `data` is base64.
    LoadData {
        data: String,
        #[serde(default)]
        format: DataFormat,
    },
    SaveSessionRequest,
    /// `data` is base64.
    LoadSessionRequest {
        data: String,
    },
    RunPluginAnalytics {
        name: String,
        #[serde(default)]
        params: Value,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<AuxOrigin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub row_count: usize,
    pub columns: Vec<ColumnSummary>,
}

impl TableSummary {
    pub fn of(table: &Table) -> Self {
        let mut columns: Vec<ColumnSummary> = table
            .dataset_columns()
            .iter()
            .map(|c| ColumnSummary {
                name: c.name().to_string(),
                kind: c.kind(),
                origin: None,
            })
            .collect();
        columns.extend(table.aux_columns().map(|a| ColumnSummary {
            name: a.name().to_string(),
            kind: a.column.kind(),
            origin: Some(a.origin),
        }));
        Self {
            row_count: table.row_count(),
            columns,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Update {
    PlotSpecChanged { plot_id: String, spec: PlotSpec },
    PlotRemoved { plot_id: String },
    StateError { code: String, message: String },
    /// `data` is base64 of the session file.
    SessionBlob { data: String },
    TableChanged { summary: TableSummary },
}

#[derive(Debug)]
struct Failure {
    code: &'static str,
    message: String,
}

fn fail(code: &'static str, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

/// Applies one event. Returns the next state and the updates in order.
pub fn dispatch(state: &SessionState, event: &Event, registry: &PluginRegistry) -> (SessionState, Vec<Update>) {
    match apply(state, event, registry) {
        Ok(result) => result,
        Err(f) => (
            state.clone(),
            vec![Update::StateError {
                code: f.code.to_string(),
                message: f.message,
            }],
        ),
    }
}

type Applied = Result<(SessionState, Vec<Update>), Failure>;

fn apply(state: &SessionState, event: &Event, registry: &PluginRegistry) -> Applied {
    match event {
        Event::HoverPoint { row_id } => {
            if let Some(id) = row_id {
                require_row(&state.table, *id)?;
            }
            let mut next = state.clone();
            next.interaction.hovered = *row_id;
            let updates = respec_consumers(&next, registry, Channel::Hover)?;
            Ok((next, updates))
        }
        Event::SelectionSet { row_ids } => {
            for id in row_ids {
                require_row(&state.table, *id)?;
            }
            let mut next = state.clone();
            next.interaction.selection = row_ids.clone();
            let updates = respec_consumers(&next, registry, Channel::Selection)?;
            Ok((next, updates))
        }
        Event::LassoDrawn {
            source_plot_id,
            polygon,
        } => lasso(state, registry, source_plot_id, polygon),
        Event::RunKMeans {
            columns,
            k,
            seed,
            standardize,
        } => {
            let (data, kept) = analysis_matrix(&state.table, columns, *standardize)?;
            let c = kmeans(&data, *k, *seed).map_err(|e| fail("analytics_failed", e.to_string()))?;
            let mut assignments = vec![None; state.table.row_count()];
            for (id, a) in kept.iter().zip(&c.assignments) {
                assignments[state.table.row_index(*id).expect("kept rows exist")] = Some(*a);
            }
            let aux = AuxColumn::clusters(CLUSTER_COLUMN, *k, &assignments);
            let mut next = state.clone();
            let name = state.table.resolve_aux_name(CLUSTER_COLUMN);
            next.table = attach(&state.table, aux)?;
            next.interaction.active_cluster_column = Some(name);
            table_changed(next, registry, Vec::new())
        }
        Event::RunPca { columns, standardize } => {
            let (data, kept) = analysis_matrix(&state.table, columns, *standardize)?;
            let e = pca2(&data).map_err(|e| fail("analytics_failed", e.to_string()))?;
            let n = state.table.row_count();
            let mut pcs = [vec![None; n], vec![None; n]];
            for (i, id) in kept.iter().enumerate() {
                let r = state.table.row_index(*id).expect("kept rows exist");
                pcs[0][r] = Some(e.coords.get(i, 0));
                pcs[1][r] = Some(e.coords.get(i, 1));
            }
            let [x, y] = pcs;
            let mut next = state.clone();
            next.table = attach(&state.table, AuxColumn::new(AuxOrigin::EmbeddingX, Column::numeric(PCA_COLUMNS[0], x)))?;
            next.table = attach(&next.table, AuxColumn::new(AuxOrigin::EmbeddingY, Column::numeric(PCA_COLUMNS[1], y)))?;
            table_changed(next, registry, Vec::new())
        }
        Event::AddPlot { config } => {
            registry
                .validate(config, &state.table)
                .map_err(|e| fail("invalid_config", e.to_string()))?;
            let plot_id = next_plot_id(state);
            let mut next = state.clone();
            next.plots.push(PlotInstance {
                plot_id: plot_id.clone(),
                config: config.clone(),
            });
            let spec = spec_for(&next, registry, &plot_id)?;
            Ok((next, vec![Update::PlotSpecChanged { plot_id, spec }]))
        }
        Event::RemovePlot { plot_id } => {
            let idx = plot_index(state, plot_id)?;
            let mut next = state.clone();
            next.plots.remove(idx);
            Ok((
                next,
                vec![Update::PlotRemoved {
                    plot_id: plot_id.clone(),
                }],
            ))
        }
        Event::UpdatePlotConfig { plot_id, config } => {
            let idx = plot_index(state, plot_id)?;
            registry
                .validate(config, &state.table)
                .map_err(|e| fail("invalid_config", e.to_string()))?;
            let mut next = state.clone();
            next.plots[idx].config = config.clone();
            let spec = spec_for(&next, registry, plot_id)?;
            Ok((
                next,
                vec![Update::PlotSpecChanged {
                    plot_id: plot_id.clone(),
                    spec,
                }],
            ))
        }
        Event::LoadData { data, format } => {
            let raw = decode(data)?;
            let table = ingest(&raw, *format, registry)?;
            let mut next = SessionState {
                table,
                plots: Vec::new(),
                interaction: Default::default(),
            };
            let mut updates = Vec::new();
            for p in &state.plots {
                if registry.validate(&p.config, &next.table).is_ok() {
                    next.plots.push(p.clone());
                } else {
                    updates.push(Update::PlotRemoved {
                        plot_id: p.plot_id.clone(),
                    });
                }
            }
            table_changed(next, registry, updates)
        }
        Event::SaveSessionRequest => Ok((
            state.clone(),
            vec![Update::SessionBlob {
                data: BASE64.encode(save_session(state)),
            }],
        )),
        Event::LoadSessionRequest { data } => {
            let raw = decode(data)?;
            let next = load_session_with(&raw, registry).map_err(|e| fail("session_invalid", e.to_string()))?;
            let updates = state
                .plots
                .iter()
                .map(|p| Update::PlotRemoved {
                    plot_id: p.plot_id.clone(),
                })
                .collect();
            table_changed(next, registry, updates)
        }
        Event::RunPluginAnalytics { name, params } => {
            let hook = registry
                .analytics_hook(name)
                .ok_or_else(|| fail("unknown_analytics", format!("no analytics named `{name}`")))?
                .map_err(|m| fail("plugin_disabled", m))?;
            let columns = hook
                .run(&state.table, &state.interaction, params)
                .map_err(|m| fail("analytics_failed", m))?;
            let mut next = state.clone();
            for aux in columns {
                next.table = attach(&next.table, aux)?;
            }
            table_changed(next, registry, Vec::new())
        }
    }
}

fn require_row(table: &Table, id: RowId) -> Result<usize, Failure> {
    table
        .row_index(id)
        .ok_or_else(|| fail("unknown_row", format!("row {id} does not exist")))
}

fn plot_index(state: &SessionState, plot_id: &str) -> Result<usize, Failure> {
    state
        .plots
        .iter()
        .position(|p| p.plot_id == plot_id)
        .ok_or_else(|| fail("unknown_plot", format!("no plot `{plot_id}`")))
}

/// `plot-N` with N one past the largest number in use.
fn next_plot_id(state: &SessionState) -> String {
    let max = state
        .plots
        .iter()
        .filter_map(|p| p.plot_id.strip_prefix("plot-")?.parse::<u64>().ok())
        .max()
        .unwrap_or(0);
    format!("plot-{}", max + 1)
}

fn attach(table: &Table, aux: AuxColumn) -> Result<Table, Failure> {
    table.attach_aux(aux).map_err(|e| fail("internal", e.to_string()))
}

fn decode(data: &str) -> Result<Vec<u8>, Failure> {
    BASE64
        .decode(data.as_bytes())
        .map_err(|e| fail("bad_payload", format!("payload is not valid base64: {e}")))
}

fn ingest(raw: &[u8], format: DataFormat, registry: &PluginRegistry) -> Result<Table, Failure> {
    let parsed = match format {
        DataFormat::Csv => crate::table::parse_csv(raw),
        DataFormat::Tsv | DataFormat::Json if !registry.capabilities().has(CAP_EXTENDED_FORMATS) => {
            return Err(fail(
                "unsupported_format",
                format!("format {format:?} needs capability `{CAP_EXTENDED_FORMATS}`"),
            ))
        }
        #[cfg(feature = "extended-formats")]
        DataFormat::Tsv => crate::table::parse_delimited(raw, b'\t'),
        #[cfg(feature = "extended-formats")]
        DataFormat::Json => crate::table::parse_json_records(raw),
        #[cfg(not(feature = "extended-formats"))]
        _ => unreachable!("capability checked above"),
    };
    parsed.map_err(|e| fail("ingest_failed", e.to_string()))
}

/// Parses a data file the way `load_data` does, honoring capability flags.
pub fn ingest_table(raw: &[u8], format: DataFormat, registry: &PluginRegistry) -> Result<Table, String> {
    ingest(raw, format, registry).map_err(|f| format!("{}: {}", f.code, f.message))
}

fn analysis_matrix(table: &Table, columns: &[String], standardize: bool) -> Result<(Matrix, Vec<RowId>), Failure> {
    let (m, kept) = table
        .numeric_matrix(columns)
        .map_err(|e| fail("analytics_failed", e.to_string()))?;
    Ok((if standardize { m.standardized() } else { m }, kept))
}

fn spec_for(state: &SessionState, registry: &PluginRegistry, plot_id: &str) -> Result<PlotSpec, Failure> {
    let plot = state.plot(plot_id).expect("plot exists");
    registry
        .build_spec(&state.table, plot_id, &plot.config, &state.interaction)
        .map_err(|e| fail("spec_failed", format!("plot `{plot_id}`: {e}")))
}

fn respec_consumers(state: &SessionState, registry: &PluginRegistry, channel: Channel) -> Result<Vec<Update>, Failure> {
    let mut updates = Vec::new();
    for p in &state.plots {
        if registry.hints(&p.config).consumes(channel) {
            updates.push(Update::PlotSpecChanged {
                plot_id: p.plot_id.clone(),
                spec: spec_for(state, registry, &p.plot_id)?,
            });
        }
    }
    Ok(updates)
}

/// Appends a table summary and fresh specs for every plot.
fn table_changed(next: SessionState, registry: &PluginRegistry, mut updates: Vec<Update>) -> Applied {
    updates.push(Update::TableChanged {
        summary: TableSummary::of(&next.table),
    });
    for p in &next.plots {
        updates.push(Update::PlotSpecChanged {
            plot_id: p.plot_id.clone(),
            spec: spec_for(&next, registry, &p.plot_id)?,
        });
    }
    Ok((next, updates))
}

fn lasso(state: &SessionState, registry: &PluginRegistry, source: &str, polygon: &Polygon) -> Applied {
    let idx = plot_index(state, source)?;
    let PlotConfig::Scatter(sc) = &state.plots[idx].config else {
        return Err(fail("invalid_source", format!("plot `{source}` does not support lasso")));
    };
    let table = &state.table;
    let (points, ids) = table
        .numeric_matrix(&[&sc.x_column, &sc.y_column])
        .map_err(|e| fail("empty_lasso", e.to_string()))?;
    let inside = lasso_select(&points, &ids, polygon).map_err(|e| fail("internal", e.to_string()))?;
    if inside.is_empty() {
        return Err(fail("empty_lasso", "the lasso encloses no points"));
    }

    let active = state
        .interaction
        .active_cluster_column
        .as_deref()
        .and_then(|name| table.aux(name))
        .filter(|a| a.origin == AuxOrigin::Cluster);
    let (name, k, mut codes): (String, usize, Vec<Option<usize>>) = match active {
        Some(aux) => {
            let k = aux.column.categories().map_or(0, <[String]>::len);
            let codes = match aux.column.data() {
                crate::table::ColumnData::Categorical { codes, .. } => codes.iter().map(|c| c.map(|c| c as usize)).collect(),
                _ => unreachable!("cluster columns are categorical"),
            };
            (aux.name().to_string(), k, codes)
        }
        None => (
            table.resolve_aux_name(CLUSTER_COLUMN),
            0,
            vec![None; table.row_count()],
        ),
    };
    for id in &inside {
        codes[table.row_index(*id).expect("selected rows exist")] = Some(k);
    }
    let mut next = state.clone();
    next.table = attach(table, AuxColumn::clusters(name.clone(), k + 1, &codes))?;
    next.interaction.active_cluster_column = Some(name);
    table_changed(next, registry, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plots::{ScatterConfig, SmilesConfig, SmilesMode};
    use crate::table::parse_csv;
    use serde_json::json;

    fn base() -> SessionState {
        let table = parse_csv(b"x,y,smiles\n0,0,C\n1,0,CC\n0,1,CCO\n1,1,c1ccccc1\n").unwrap();
        SessionState {
            table,
            ..Default::default()
        }
    }

    fn scatter() -> PlotConfig {
        PlotConfig::Scatter(ScatterConfig {
            x_column: "x".into(),
            y_column: "y".into(),
            color_by: None,
            symbol_by: None,
        })
    }

    fn smiles() -> PlotConfig {
        PlotConfig::Smiles(SmilesConfig {
            smiles_column: "smiles".into(),
            mode: SmilesMode::HoverFollow,
            pinned_row: None,
        })
    }

    fn run(state: &SessionState, events: &[Event]) -> (SessionState, Vec<Update>) {
        let registry = PluginRegistry::default();
        let mut s = state.clone();
        let mut last = Vec::new();
        for e in events {
            (s, last) = dispatch(&s, e, &registry);
        }
        (s, last)
    }

    #[test]
    fn event_json_shape() {
        let e: Event = serde_json::from_value(json!({"type": "hover_point", "row_id": 2})).unwrap();
        assert_eq!(e, Event::HoverPoint { row_id: Some(RowId(2)) });
        let e: Event = serde_json::from_value(json!({"type": "run_kmeans", "columns": ["x"], "k": 2, "seed": 1})).unwrap();
        assert!(matches!(e, Event::RunKMeans { standardize: false, .. }));
        let e: Event = serde_json::from_value(json!({"type": "save_session_request"})).unwrap();
        assert_eq!(e, Event::SaveSessionRequest);
    }

    #[test]
    fn hover_respecs_only_smiles() {
        let (s, _) = run(
            &base(),
            &[Event::AddPlot { config: scatter() }, Event::AddPlot { config: smiles() }],
        );
        let (_, updates) = run(&s, &[Event::HoverPoint { row_id: Some(RowId(1)) }]);
        assert_eq!(updates.len(), 1);
        let Update::PlotSpecChanged { plot_id, spec } = &updates[0] else { panic!() };
        assert_eq!(plot_id, "plot-2");
        assert_eq!(spec.series["smiles"], "CC");
        let (_, updates) = run(&s, &[Event::HoverPoint { row_id: None }]);
        let Update::PlotSpecChanged { spec, .. } = &updates[0] else { panic!() };
        assert_eq!(spec.series, json!({}));
    }

    #[test]
    fn failures_leave_state_unchanged() {
        let s = base();
        for e in [
            Event::RunKMeans {
                columns: vec!["smiles".into()],
                k: 2,
                seed: 0,
                standardize: false,
            },
            Event::RemovePlot { plot_id: "plot-9".into() },
            Event::HoverPoint { row_id: Some(RowId(99)) },
            Event::LoadData {
                data: "***".into(),
                format: DataFormat::Csv,
            },
        ] {
            let (next, updates) = run(&s, &[e]);
            assert_eq!(next, s);
            assert_eq!(updates.len(), 1);
            assert!(matches!(updates[0], Update::StateError { .. }));
        }
    }

    #[test]
    fn kmeans_with_no_complete_rows() {
        let table = parse_csv(b"x,y\n1,NA\nNA,2\n").unwrap();
        let s = SessionState {
            table,
            ..Default::default()
        };
        let (next, updates) = run(
            &s,
            &[Event::RunKMeans {
                columns: vec!["x".into(), "y".into()],
                k: 1,
                seed: 0,
                standardize: false,
            }],
        );
        assert_eq!(next, s);
        assert!(matches!(&updates[..], [Update::StateError { .. }]));
    }

    #[test]
    fn lasso_appends_clusters() {
        let square = |x0: f64, y0: f64| Polygon::new(vec![[x0, y0], [x0 + 0.5, y0], [x0 + 0.5, y0 + 0.5], [x0, y0 + 0.5]]).unwrap();
        let (s, _) = run(&base(), &[Event::AddPlot { config: scatter() }]);
        let (s, _) = run(
            &s,
            &[Event::LassoDrawn {
                source_plot_id: "plot-1".into(),
                polygon: square(-0.1, -0.1),
            }],
        );
        assert_eq!(s.interaction.active_cluster_column.as_deref(), Some("cluster"));
        let labels = s.table.column("cluster").unwrap().labels();
        assert_eq!(labels, vec![Some("c1".to_string()), None, None, None]);
        let (s, updates) = run(
            &s,
            &[Event::LassoDrawn {
                source_plot_id: "plot-1".into(),
                polygon: square(0.9, 0.9),
            }],
        );
        let labels = s.table.column("cluster").unwrap().labels();
        assert_eq!(labels, vec![Some("c1".into()), None, None, Some("c2".into())]);
        assert!(matches!(updates[0], Update::TableChanged { .. }));
        let (_, updates) = run(
            &s,
            &[Event::LassoDrawn {
                source_plot_id: "plot-1".into(),
                polygon: square(5.0, 5.0),
            }],
        );
        assert!(matches!(&updates[..], [Update::StateError { code, .. }] if code == "empty_lasso"));
    }

    #[test]
    fn plot_ids_follow_the_largest() {
        let (s, _) = run(
            &base(),
            &[
                Event::AddPlot { config: scatter() },
                Event::AddPlot { config: scatter() },
                Event::RemovePlot { plot_id: "plot-1".into() },
                Event::AddPlot { config: scatter() },
            ],
        );
        let ids: Vec<&str> = s.plots.iter().map(|p| p.plot_id.as_str()).collect();
        assert_eq!(ids, ["plot-2", "plot-3"]);
    }

    #[test]
    fn save_and_load_through_events() {
        let (s, _) = run(&base(), &[Event::AddPlot { config: scatter() }]);
        let (_, updates) = run(&s, &[Event::SaveSessionRequest]);
        let Update::SessionBlob { data } = &updates[0] else { panic!() };
        let (restored, updates) = run(&SessionState::default(), &[Event::LoadSessionRequest { data: data.clone() }]);
        assert_eq!(restored, s);
        assert!(matches!(updates[0], Update::TableChanged { .. }));
    }

    #[test]
    fn pca_attaches_embedding() {
        let (s, _) = run(
            &base(),
            &[Event::RunPca {
                columns: vec!["x".into(), "y".into()],
                standardize: false,
            }],
        );
        assert_eq!(s.table.aux("PC1").unwrap().origin, AuxOrigin::EmbeddingX);
        assert_eq!(s.table.aux("PC2").unwrap().origin, AuxOrigin::EmbeddingY);
    }
}
