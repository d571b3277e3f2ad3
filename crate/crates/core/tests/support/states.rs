//! Seeded generator of valid session states.

#![allow(dead_code)]

use linkplot_core::plots::{InteractionState, PlotConfig};
use linkplot_core::session::{PlotInstance, SessionState};
use linkplot_core::table::{AuxColumn, AuxOrigin, Column, ColumnKind, RowId, Table};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const TEXT_POOL: &[&str] = &["", "plain", "with \"quotes\"", "tab\tand\nnewline", "ünïcödé ✓", "back\\slash", "\u{1}"];

fn number(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..6) {
        0 => rng.random_range(-1.0..1.0),
        1 => rng.random_range(-1e6..1e6),
        2 => rng.random_range(-5i32..5) as f64,
        3 => 10f64.powi(rng.random_range(-300..300)) * rng.random_range(1.0..10.0),
        4 => f64::from_bits(rng.random::<u64>() >> 2).min(1e300),
        _ => 0.1 + 0.2,
    }
}

fn maybe<T>(rng: &mut impl Rng, f: impl FnOnce(&mut ChaCha8Rng) -> T, inner: &mut ChaCha8Rng) -> Option<T> {
    if rng.random_bool(0.15) {
        None
    } else {
        Some(f(inner))
    }
}

pub fn random_state(seed: u64) -> SessionState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inner = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let n = rng.random_range(0..25);

    let mut ids: Vec<u64> = (0..n as u64).map(|i| i * rng.random_range(1..4) + rng.random_range(0..2) * 1000).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.shuffle(&mut rng);
    let n = ids.len();
    let row_ids: Vec<RowId> = ids.into_iter().map(RowId).collect();

    let mut columns = Vec::new();
    for j in 0..rng.random_range(1..6) {
        let name = format!("{}{j}", ["x", "name with space", "ç", "\"q\""][j % 4]);
        let col = match rng.random_range(0..3) {
            0 => Column::numeric(name, (0..n).map(|_| maybe(&mut rng, |r| number(r), &mut inner)).collect()),
            1 => {
                let labels: Vec<Option<String>> = (0..n)
                    .map(|_| maybe(&mut rng, |r| format!("L{}", r.random_range(0..4)), &mut inner))
                    .collect();
                Column::categorical(name, &labels)
            }
            _ => Column::text(
                name,
                (0..n)
                    .map(|_| maybe(&mut rng, |r| TEXT_POOL.choose(r).unwrap().to_string(), &mut inner))
                    .collect(),
            ),
        };
        columns.push(col);
    }

    let mut aux = Vec::new();
    if rng.random_bool(0.6) {
        let k = rng.random_range(1..5);
        let assignments: Vec<Option<usize>> =
            (0..n).map(|_| rng.random_bool(0.8).then(|| inner.random_range(0..k))).collect();
        aux.push(AuxColumn::clusters("cluster", k, &assignments));
    }
    if rng.random_bool(0.4) {
        for (name, origin) in [("PC1", AuxOrigin::EmbeddingX), ("PC2", AuxOrigin::EmbeddingY)] {
            aux.push(AuxColumn::new(
                origin,
                Column::numeric(name, (0..n).map(|_| Some(number(&mut inner))).collect()),
            ));
        }
    }
    let table = Table::new(row_ids.clone(), columns, aux).unwrap();

    let names_of = |kind: ColumnKind| -> Vec<String> {
        table.columns().filter(|c| c.kind() == kind).map(|c| c.name().to_owned()).collect()
    };
    let numeric = names_of(ColumnKind::Numeric);
    let categorical = names_of(ColumnKind::Categorical);
    let text = names_of(ColumnKind::Text);

    let mut plots = Vec::new();
    for p in 0..rng.random_range(0..5) {
        let config = match rng.random_range(0..6) {
            0 if !numeric.is_empty() => json!({
                "kind": "scatter",
                "x_column": numeric.choose(&mut rng).unwrap(),
                "y_column": numeric.choose(&mut rng).unwrap(),
            }),
            1 if !numeric.is_empty() => json!({
                "kind": "histogram",
                "column": numeric.choose(&mut rng).unwrap(),
                "bin_count": rng.random_range(1..50),
                "split_by_cluster": rng.random_bool(0.5),
            }),
            2 if !numeric.is_empty() => json!({
                "kind": "heatmap",
                "x_column": numeric.choose(&mut rng).unwrap(),
                "y_column": numeric.choose(&mut rng).unwrap(),
            }),
            3 if !numeric.is_empty() && !categorical.is_empty() => json!({
                "kind": "barplot",
                "value_column": numeric.choose(&mut rng).unwrap(),
                "group_by": categorical.choose(&mut rng).unwrap(),
                "aggregate": (["mean", "count", "sum"]).choose(&mut rng).unwrap(),
            }),
            4 if !text.is_empty() => json!({"kind": "smiles", "smiles_column": text.choose(&mut rng).unwrap()}),
            _ => json!({"kind": "table", "page_size": rng.random_range(1..100)}),
        };
        plots.push(PlotInstance {
            plot_id: format!("plot-{}", p + 1),
            config: PlotConfig::from_value(config).unwrap(),
        });
    }

    let interaction = InteractionState {
        active_cluster_column: table.aux("cluster").filter(|_| rng.random_bool(0.7)).map(|a| a.name().to_owned()),
        selection: row_ids.iter().copied().filter(|_| rng.random_bool(0.3)).collect(),
        hovered: row_ids.choose(&mut rng).copied().filter(|_| rng.random_bool(0.5)),
    };
    SessionState {
        table,
        plots,
        interaction,
    }
}
