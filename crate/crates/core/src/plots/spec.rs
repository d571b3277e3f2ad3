use serde_json::{json, Map, Value};

use super::binning::count_into;
use super::{
    bin2d, bin_histogram, group_aggregate, paginate, validate_builtin, BarplotConfig, Channel, ColorAssignment,
    HeatmapConfig, HistogramConfig, InteractionHints, InteractionState, PlotConfig, PlotError, PlotSpec,
    ScatterConfig, SmilesConfig, SmilesMode, TableConfig, PALETTE, PALETTE_WRAP_WARNING, PLOTSPEC_SCHEMA_VERSION,
};
use crate::smiles::{depict_svg, layout2d, parse_smiles, DepictStyle};
use crate::table::{Column, ColumnData, ColumnKind, Table, IMPLICIT_CLUSTER_LABEL};

/// Per-row colour labels resolved from a categorical column.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterColors {
    pub column: Option<String>,
    pub labels: Vec<Option<String>>,
    pub assignment: ColorAssignment,
}

impl ClusterColors {
    pub fn index(&self, row: usize) -> Option<usize> {
        self.labels[row].as_deref().and_then(|l| self.assignment.index_of(l))
    }

    fn legend(&self) -> Value {
        Value::Array(
            self.assignment
                .labels
                .iter()
                .zip(&self.assignment.indices)
                .map(|(l, i)| json!({"label": l, "color": i}))
                .collect(),
        )
    }
}

/// Resolves colour groups from `column`. With `implicit_default`, rows without
/// a label (and every row when there is no column) fall into the reserved
/// default cluster.
pub fn cluster_colors(table: &Table, column: Option<&str>, implicit_default: bool) -> ClusterColors {
    let n = table.row_count();
    let col = column.and_then(|name| table.column(name));
    let (mut order, mut labels): (Vec<String>, Vec<Option<String>>) = match col.map(Column::data) {
        Some(ColumnData::Categorical { categories, codes }) => (
            categories.clone(),
            codes.iter().map(|c| c.map(|c| categories[c as usize].clone())).collect(),
        ),
        Some(_) => {
            let labels = col.unwrap().labels();
            let mut order: Vec<String> = Vec::new();
            for l in labels.iter().flatten() {
                if !order.contains(l) {
                    order.push(l.clone());
                }
            }
            (order, labels)
        }
        None => (Vec::new(), vec![None; n]),
    };
    if implicit_default && labels.iter().any(Option::is_none) {
        order.push(IMPLICIT_CLUSTER_LABEL.to_string());
        for l in labels.iter_mut().filter(|l| l.is_none()) {
            *l = Some(IMPLICIT_CLUSTER_LABEL.to_string());
        }
    }
    ClusterColors {
        column: col.map(|c| c.name().to_string()),
        labels,
        assignment: ColorAssignment::new(order),
    }
}

fn active_cluster<'a>(table: &Table, state: &'a InteractionState) -> Option<&'a str> {
    state
        .active_cluster_column
        .as_deref()
        .filter(|name| table.column(name).is_some())
}

/// Which channels a plot with this configuration emits and consumes.
pub fn hints_for(config: &PlotConfig) -> InteractionHints {
    use Channel::*;
    let (emits, consumes) = match config {
        PlotConfig::Scatter(c) => {
            let mut consumes = vec![Selection];
            if c.color_by.is_none() {
                consumes.push(Clusters);
            }
            (vec![Hover, Selection, Lasso], consumes)
        }
        PlotConfig::Histogram(c) if c.split_by_cluster => (vec![], vec![Clusters]),
        PlotConfig::Histogram(_) | PlotConfig::Heatmap(_) => (vec![], vec![]),
        PlotConfig::Barplot(c) if c.group_by.is_none() => (vec![], vec![Clusters]),
        PlotConfig::Barplot(_) => (vec![], vec![]),
        PlotConfig::Table(_) => (vec![Hover, Selection], vec![Selection]),
        PlotConfig::Smiles(c) if c.mode == SmilesMode::HoverFollow => (vec![], vec![Hover]),
        PlotConfig::Smiles(_) => (vec![], vec![]),
        PlotConfig::Custom(_) => (vec![], vec![]),
    };
    InteractionHints { emits, consumes }
}

fn numbers<'a>(table: &'a Table, name: &str) -> Result<&'a [Option<f64>], PlotError> {
    let column = table
        .column(name)
        .ok_or_else(|| PlotError::UnknownColumn(name.to_string()))?;
    column.numbers().ok_or(PlotError::KindMismatch {
        column: name.to_string(),
        found: column.kind(),
    })
}

struct Built {
    series: Value,
    encodings: Value,
    warnings: Vec<String>,
}

impl Built {
    fn new(series: Value, encodings: Value) -> Self {
        Self {
            series,
            encodings,
            warnings: Vec::new(),
        }
    }

    fn colored(mut self, colors: &ClusterColors) -> Self {
        if colors.assignment.wrapped {
            self.warnings.push(PALETTE_WRAP_WARNING.to_string());
        }
        self
    }
}

/// Resolves `config` against `table` and `state` into a self-contained spec.
/// Only built-in kinds are handled here; plugin kinds go through their own hook.
pub fn build_plot_spec(
    table: &Table,
    plot_id: &str,
    config: &PlotConfig,
    state: &InteractionState,
) -> Result<PlotSpec, PlotError> {
    validate_builtin(config, table)?;
    let built = match config {
        PlotConfig::Scatter(c) => scatter(table, c, state)?,
        PlotConfig::Histogram(c) => histogram(table, c, state)?,
        PlotConfig::Heatmap(c) => heatmap(table, c)?,
        PlotConfig::Barplot(c) => barplot(table, c, state)?,
        PlotConfig::Table(c) => data_table(table, c, state)?,
        PlotConfig::Smiles(c) => smiles(table, c, state)?,
        PlotConfig::Custom(c) => return Err(PlotError::UnknownKind(c.kind.clone())),
    };
    Ok(PlotSpec {
        schema_version: PLOTSPEC_SCHEMA_VERSION,
        plot_id: plot_id.to_string(),
        kind: config.kind().to_string(),
        series: built.series,
        encodings: built.encodings,
        interaction_hints: hints_for(config),
        warnings: built.warnings,
    })
}

fn scatter(table: &Table, c: &ScatterConfig, state: &InteractionState) -> Result<Built, PlotError> {
    let xs = numbers(table, &c.x_column)?;
    let ys = numbers(table, &c.y_column)?;
    let ids = table.row_ids();
    let rows: Vec<usize> = (0..table.row_count())
        .filter(|&r| xs[r].is_some() && ys[r].is_some())
        .collect();

    let color_column = c.color_by.as_deref().or_else(|| active_cluster(table, state));
    let numeric_color = color_column
        .and_then(|name| table.column(name))
        .filter(|col| col.kind() == ColumnKind::Numeric);
    let colors = match numeric_color {
        Some(_) => cluster_colors(table, None, true),
        None => cluster_colors(table, color_column, c.color_by.is_none()),
    };

    let mut series = Map::new();
    series.insert("row_ids".into(), json!(rows.iter().map(|&r| ids[r]).collect::<Vec<_>>()));
    series.insert("x".into(), json!(rows.iter().map(|&r| xs[r]).collect::<Vec<_>>()));
    series.insert("y".into(), json!(rows.iter().map(|&r| ys[r]).collect::<Vec<_>>()));
    series.insert(
        "selected".into(),
        json!(rows.iter().map(|&r| state.selection.contains(&ids[r])).collect::<Vec<_>>()),
    );
    let mut encodings = Map::new();
    encodings.insert("x_label".into(), json!(c.x_column));
    encodings.insert("y_label".into(), json!(c.y_column));
    encodings.insert("color_column".into(), json!(color_column));
    encodings.insert("palette".into(), json!(PALETTE));
    match numeric_color {
        Some(col) => {
            let values = col.numbers().unwrap();
            let picked: Vec<Option<f64>> = rows.iter().map(|&r| values[r]).collect();
            let (lo, hi) = picked.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(*v), b.max(*v))
            });
            series.insert("color_value".into(), json!(picked));
            encodings.insert("color_range".into(), if lo <= hi { json!([lo, hi]) } else { Value::Null });
            encodings.insert("legend".into(), json!([]));
        }
        None => {
            series.insert(
                "color".into(),
                json!(rows.iter().map(|&r| colors.index(r)).collect::<Vec<_>>()),
            );
            encodings.insert("legend".into(), colors.legend());
        }
    }
    if let Some(name) = &c.symbol_by {
        let symbols = cluster_colors(table, Some(name), false);
        series.insert(
            "symbol".into(),
            json!(rows
                .iter()
                .map(|&r| symbols.labels[r].as_deref().and_then(|l| symbols.assignment.labels.iter().position(|x| x == l)))
                .collect::<Vec<_>>()),
        );
        encodings.insert("symbol_column".into(), json!(name));
        encodings.insert("symbol_labels".into(), json!(symbols.assignment.labels));
    }
    Ok(Built::new(Value::Object(series), Value::Object(encodings)).colored(&colors))
}

fn histogram(table: &Table, c: &HistogramConfig, state: &InteractionState) -> Result<Built, PlotError> {
    let values = numbers(table, &c.column)?;
    let h = match bin_histogram(values, c.bin_count) {
        Ok(h) => h,
        Err(PlotError::NoData) => return Ok(no_data(json!({"x_label": c.column, "y_label": "count"}))),
        Err(e) => return Err(e),
    };
    let mut series = json!({
        "edges": h.edges,
        "counts": h.counts,
        "dropped_count": h.dropped_count,
    });
    let mut encodings = json!({"x_label": c.column, "y_label": "count", "palette": PALETTE});
    let mut colors = None;
    if c.split_by_cluster {
        let cc = cluster_colors(table, active_cluster(table, state), true);
        let groups: Vec<Value> = cc
            .assignment
            .labels
            .iter()
            .zip(&cc.assignment.indices)
            .map(|(label, color)| {
                let in_group = (0..table.row_count())
                    .filter(|&r| cc.labels[r].as_deref() == Some(label.as_str()))
                    .filter_map(|r| values[r]);
                json!({"label": label, "color": color, "counts": count_into(in_group, &h.edges)})
            })
            .collect();
        series["groups"] = Value::Array(groups);
        encodings["legend"] = cc.legend();
        colors = Some(cc);
    }
    let built = Built::new(series, encodings);
    Ok(match colors {
        Some(cc) => built.colored(&cc),
        None => built,
    })
}

fn no_data(encodings: Value) -> Built {
    Built {
        series: json!({}),
        encodings,
        warnings: vec!["no_data".to_string()],
    }
}

fn heatmap(table: &Table, c: &HeatmapConfig) -> Result<Built, PlotError> {
    let xs = numbers(table, &c.x_column)?;
    let ys = numbers(table, &c.y_column)?;
    let encodings = json!({"x_label": c.x_column, "y_label": c.y_column});
    match bin2d(xs, ys, c.x_bins, c.y_bins) {
        Ok(g) => Ok(Built::new(
            json!({
                "x_edges": g.x_edges,
                "y_edges": g.y_edges,
                "counts": g.counts,
                "dropped_count": g.dropped_count,
            }),
            encodings,
        )),
        Err(PlotError::NoData) => Ok(no_data(encodings)),
        Err(e) => Err(e),
    }
}

fn barplot(table: &Table, c: &BarplotConfig, state: &InteractionState) -> Result<Built, PlotError> {
    let values = numbers(table, &c.value_column)?;
    let group_column = c.group_by.as_deref().or_else(|| active_cluster(table, state));
    let cc = cluster_colors(table, group_column, c.group_by.is_none());
    let groups = group_aggregate(values, &cc.labels, c.aggregate)?;
    let series = json!({
        "labels": groups.iter().map(|g| &g.label).collect::<Vec<_>>(),
        "values": groups.iter().map(|g| g.value).collect::<Vec<_>>(),
        "counts": groups.iter().map(|g| g.count).collect::<Vec<_>>(),
        "colors": groups.iter().map(|g| cc.assignment.index_of(&g.label)).collect::<Vec<_>>(),
    });
    let encodings = json!({
        "x_label": group_column.unwrap_or(IMPLICIT_CLUSTER_LABEL),
        "y_label": format!("{} of {}", c.aggregate, c.value_column),
        "palette": PALETTE,
        "legend": cc.legend(),
    });
    Ok(Built::new(series, encodings).colored(&cc))
}

fn data_table(table: &Table, c: &TableConfig, state: &InteractionState) -> Result<Built, PlotError> {
    let rows = paginate(table, c.page, c.page_size, c.sort_column.as_deref())?;
    let columns: Vec<&Column> = table.columns().collect();
    let ids = table.row_ids();
    let total = table.row_count();
    let series = json!({
        "columns": columns.iter().map(|col| json!({"name": col.name(), "kind": col.kind()})).collect::<Vec<_>>(),
        "row_ids": rows.iter().map(|&r| ids[r]).collect::<Vec<_>>(),
        "rows": rows
            .iter()
            .map(|&r| columns.iter().map(|col| col.cell(r).to_json()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "selected": rows.iter().map(|&r| state.selection.contains(&ids[r])).collect::<Vec<_>>(),
        "page": c.page,
        "page_size": c.page_size,
        "page_count": total.div_ceil(c.page_size),
        "total_rows": total,
    });
    Ok(Built::new(series, json!({"sort_column": c.sort_column})))
}

fn smiles(table: &Table, c: &SmilesConfig, state: &InteractionState) -> Result<Built, PlotError> {
    let row_id = match c.mode {
        SmilesMode::HoverFollow => state.hovered,
        SmilesMode::Pinned => c.pinned_row,
    };
    let encodings = json!({"smiles_column": c.smiles_column, "mode": c.mode});
    let Some(row_id) = row_id else {
        return Ok(Built::new(json!({}), encodings));
    };
    let column = table
        .column(&c.smiles_column)
        .ok_or_else(|| PlotError::UnknownColumn(c.smiles_column.clone()))?;
    let Some(row) = table.row_index(row_id) else {
        return Err(PlotError::UnknownRow(row_id));
    };
    let text = column.cell(row).as_str().map(str::to_string);
    let mut warnings = Vec::new();
    let svg = text.as_deref().and_then(|s| {
        let result = parse_smiles(s).map(|g| {
            let layout = layout2d(&g);
            depict_svg(&g, &layout, &DepictStyle::default()).expect("layout covers every atom")
        });
        match result {
            Ok(svg) => Some(svg),
            Err(e) => {
                warnings.push(format!("smiles_error: {e}"));
                None
            }
        }
    });
    Ok(Built {
        series: json!({"row_id": row_id, "smiles": text, "svg": svg}),
        encodings,
        warnings,
    })
}
