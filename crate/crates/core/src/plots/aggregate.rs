use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PlotError;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    #[default]
    Mean,
    Count,
    Sum,
}

impl FromStr for Aggregate {
    type Err = PlotError;

    fn from_str(s: &str) -> Result<Self, PlotError> {
        match s {
            "mean" => Ok(Aggregate::Mean),
            "count" => Ok(Aggregate::Count),
            "sum" => Ok(Aggregate::Sum),
            other => Err(PlotError::UnknownAggregate(other.to_string())),
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Mean => "mean",
            Aggregate::Count => "count",
            Aggregate::Sum => "sum",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupValue {
    pub label: String,
    /// `None` for mean and sum over a group with no values.
    pub value: Option<f64>,
    /// Non-missing values in the group.
    pub count: u64,
}

/// Aggregates `values` per group label, groups in order of first appearance.
/// Rows without a label are skipped.
pub fn group_aggregate<S: AsRef<str>>(
    values: &[Option<f64>],
    groups: &[Option<S>],
    agg: Aggregate,
) -> Result<Vec<GroupValue>, PlotError> {
    if values.len() != groups.len() {
        return Err(PlotError::LengthMismatch {
            expected: values.len(),
            found: groups.len(),
        });
    }
    let mut order: Vec<(String, f64, u64)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (v, g) in values.iter().zip(groups) {
        let Some(g) = g else { continue };
        let slot = *index.entry(g.as_ref().to_string()).or_insert_with(|| {
            order.push((g.as_ref().to_string(), 0.0, 0));
            order.len() - 1
        });
        if let Some(x) = v.filter(|x| x.is_finite()) {
            order[slot].1 += x;
            order[slot].2 += 1;
        }
    }
    Ok(order
        .into_iter()
        .map(|(label, sum, count)| {
            let value = match agg {
                Aggregate::Count => Some(count as f64),
                _ if count == 0 => None,
                Aggregate::Sum => Some(sum),
                Aggregate::Mean => Some(sum / count as f64),
            };
            GroupValue { label, value, count }
        })
        .collect())
}

fn compare_cells(a: Cell<'_>, b: Cell<'_>) -> Ordering {
    match (a, b) {
        (Cell::Missing, Cell::Missing) => Ordering::Equal,
        (Cell::Missing, _) => Ordering::Greater,
        (_, Cell::Missing) => Ordering::Less,
        (Cell::Number(x), Cell::Number(y)) => x.total_cmp(&y),
        (x, y) => x.as_str().unwrap_or("").cmp(y.as_str().unwrap_or("")),
    }
}

/// Row positions on one page. Sorting is stable with missing values last and
/// ties broken by row id; a page past the end is empty.
pub fn paginate(
    table: &Table,
    page: usize,
    page_size: usize,
    sort_column: Option<&str>,
) -> Result<Vec<usize>, PlotError> {
    if page_size == 0 {
        return Err(PlotError::InvalidSetting {
            field: "page_size".into(),
            reason: "must be at least 1".into(),
        });
    }
    let ids = table.row_ids();
    let mut rows: Vec<usize> = (0..table.row_count()).collect();
    match sort_column {
        Some(name) => {
            let column = table
                .column(name)
                .ok_or_else(|| PlotError::UnknownColumn(name.to_string()))?;
            rows.sort_by(|&a, &b| compare_cells(column.cell(a), column.cell(b)).then(ids[a].cmp(&ids[b])));
        }
        None => rows.sort_by_key(|&r| ids[r]),
    }
    let start = page.saturating_mul(page_size);
    Ok(rows.into_iter().skip(start).take(page_size).collect())
}
