use serde::Serialize;

use super::PlotError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `counts.len() + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub dropped_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid2D {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// `counts[xi][yi]`.
    pub counts: Vec<Vec<u64>>,
    pub dropped_count: u64,
}

/// Equal-width edges over `[lo, hi]`; a zero-width range becomes a single
/// unit-wide bin centred on the value.
pub(crate) fn edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo - 0.5, lo + 0.5];
    }
    let width = (hi - lo) / bins as f64;
    let mut e: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
    e.push(hi);
    e
}

/// Bin of `v` under half-open bins with the last one closed.
pub(crate) fn bin_index(v: f64, edges: &[f64]) -> usize {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut idx = (((v - lo) / (hi - lo)) * bins as f64).floor() as isize;
    idx = idx.clamp(0, bins as isize - 1);
    let mut idx = idx as usize;
    // The float estimate can land one off near an edge.
    while idx > 0 && v < edges[idx] {
        idx -= 1;
    }
    while idx + 1 < bins && v >= edges[idx + 1] {
        idx += 1;
    }
    idx
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

fn present(v: &Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite())
}

pub fn bin_histogram(values: &[Option<f64>], bin_count: usize) -> Result<Histogram, PlotError> {
    if bin_count == 0 {
        return Err(PlotError::InvalidSetting {
            field: "bin_count".into(),
            reason: "must be at least 1".into(),
        });
    }
    let (lo, hi) = range(values.iter().filter_map(present)).ok_or(PlotError::NoData)?;
    let edges = edges(lo, hi, bin_count);
    let mut counts = vec![0u64; edges.len() - 1];
    let mut dropped = 0;
    for v in values {
        match present(v) {
            Some(x) => counts[bin_index(x, &edges)] += 1,
            None => dropped += 1,
        }
    }
    Ok(Histogram {
        edges,
        counts,
        dropped_count: dropped,
    })
}

/// Histogram over fixed edges, used to split one histogram by group.
pub(crate) fn count_into(values: impl Iterator<Item = f64>, edges: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; edges.len() - 1];
    for v in values {
        if v >= edges[0] && v <= edges[edges.len() - 1] {
            counts[bin_index(v, edges)] += 1;
        }
    }
    counts
}

pub fn bin2d(
    x: &[Option<f64>],
    y: &[Option<f64>],
    x_bins: usize,
    y_bins: usize,
) -> Result<Grid2D, PlotError> {
    if x.len() != y.len() {
        return Err(PlotError::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    for (field, bins) in [("x_bins", x_bins), ("y_bins", y_bins)] {
        if bins == 0 {
            return Err(PlotError::InvalidSetting {
                field: field.into(),
                reason: "must be at least 1".into(),
            });
        }
    }
    let pairs: Vec<Option<(f64, f64)>> = x
        .iter()
        .zip(y)
        .map(|(a, b)| Some((present(a)?, present(b)?)))
        .collect();
    let (x_lo, x_hi) = range(pairs.iter().flatten().map(|p| p.0)).ok_or(PlotError::NoData)?;
    let (y_lo, y_hi) = range(pairs.iter().flatten().map(|p| p.1)).ok_or(PlotError::NoData)?;
    let x_edges = edges(x_lo, x_hi, x_bins);
    let y_edges = edges(y_lo, y_hi, y_bins);
    let mut counts = vec![vec![0u64; y_edges.len() - 1]; x_edges.len() - 1];
    let mut dropped = 0;
    for p in &pairs {
        match p {
            Some((a, b)) => counts[bin_index(*a, &x_edges)][bin_index(*b, &y_edges)] += 1,
            None => dropped += 1,
        }
    }
    Ok(Grid2D {
        x_edges,
        y_edges,
        counts,
        dropped_count: dropped,
    })
}
