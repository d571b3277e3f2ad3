//! Violin plots as a plugin plot kind: one Gaussian kernel density estimate
//! per group, bandwidth by Silverman's rule.

use std::sync::Arc;

use linkplot_core::engine::{HookTable, PlotBody, PlotHook, PluginManifest};
use linkplot_core::plots::{cluster_colors, InteractionState, PlotError, PALETTE};
use linkplot_core::table::Table;
use serde_json::{json, Map, Value};

pub const MANIFEST: &str = include_str!("../plugin/violin.plugin.json");
pub const BUILDER_HOOK: &str = "violin.build";
const DEFAULT_POINTS: usize = 64;

pub fn manifest() -> PluginManifest {
    PluginManifest::from_json(MANIFEST).expect("bundled manifest is valid")
}

pub fn hooks() -> HookTable {
    let mut table = HookTable::default();
    table.add_plot(BUILDER_HOOK, Arc::new(Violin));
    table
}

/// Silverman's rule of thumb; `None` when fewer than two values.
pub fn silverman_bandwidth(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = match (var.sqrt(), iqr / 1.34) {
        (s, q) if q > 0.0 => s.min(q),
        (s, _) => s,
    };
    (spread > 0.0).then(|| 0.9 * spread * (n as f64).powf(-0.2))
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Density of `values` at each of `grid`, Gaussian kernel of width `h`.
pub fn kde(values: &[f64], h: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&x| {
            norm * values
                .iter()
                .map(|v| (-0.5 * ((x - v) / h).powi(2)).exp())
                .sum::<f64>()
        })
        .collect()
}

struct Violin;

impl PlotHook for Violin {
    fn build(
        &self,
        table: &Table,
        state: &InteractionState,
        settings: &Map<String, Value>,
    ) -> Result<PlotBody, PlotError> {
        let column = settings["column"].as_str().unwrap_or_default();
        let values = table
            .column(column)
            .and_then(|c| c.numbers())
            .ok_or_else(|| PlotError::UnknownColumn(column.to_string()))?;
        let points = settings
            .get("points")
            .and_then(Value::as_u64)
            .map_or(DEFAULT_POINTS, |p| p as usize);
        let explicit = settings.get("group_by").and_then(Value::as_str);
        let group_column = explicit.or(state.active_cluster_column.as_deref());
        let groups = cluster_colors(table, group_column, explicit.is_none());

        let mut violins = Vec::new();
        let mut warnings = Vec::new();
        for (label, color) in groups.assignment.labels.iter().zip(&groups.assignment.indices) {
            let v: Vec<f64> = (0..table.row_count())
                .filter(|&r| groups.labels[r].as_deref() == Some(label.as_str()))
                .filter_map(|r| values[r])
                .collect();
            if v.is_empty() {
                continue;
            }
            let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
            let body = match silverman_bandwidth(&v) {
                Some(h) => {
                    let (a, b) = (lo - 3.0 * h, hi + 3.0 * h);
                    let grid: Vec<f64> = (0..points)
                        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
                        .collect();
                    let density = kde(&v, h, &grid);
                    json!({"grid": grid, "density": density, "bandwidth": h})
                }
                None => {
                    warnings.push(format!("degenerate_group: {label}"));
                    json!({"grid": [lo], "density": [1.0], "bandwidth": null})
                }
            };
            let mut entry = json!({"label": label, "color": color, "count": v.len()});
            entry.as_object_mut().unwrap().extend(body.as_object().unwrap().clone());
            violins.push(entry);
        }
        if groups.assignment.wrapped {
            warnings.push(linkplot_core::plots::PALETTE_WRAP_WARNING.to_string());
        }
        Ok(PlotBody {
            series: json!({"violins": violins}),
            encodings: json!({"y_label": column, "group_column": group_column, "palette": PALETTE}),
            warnings,
        })
    }
}
