//! Even-odd point-in-polygon test and lasso selection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::AnalyticsError;
use crate::matrix::Matrix;
use crate::table::RowId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolygonError {
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} is not finite")]
    NonFinite(usize),
}

/// Closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

impl Polygon {
    /// Drops consecutive duplicate vertices (including a closing vertex equal
    /// to the first) and requires at least three that remain.
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self, PolygonError> {
        if let Some(i) = vertices.iter().position(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(PolygonError::NonFinite(i));
        }
        let mut cleaned: Vec<[f64; 2]> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if cleaned.last() != Some(&v) {
                cleaned.push(v);
            }
        }
        while cleaned.len() > 1 && cleaned.first() == cleaned.last() {
            cleaned.pop();
        }
        if cleaned.len() < 3 {
            return Err(PolygonError::TooFewVertices(cleaned.len()));
        }
        Ok(Self { vertices: cleaned })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let vertices = Vec::<[f64; 2]>::deserialize(d)?;
        Polygon::new(vertices).map_err(serde::de::Error::custom)
    }
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    cross == 0.0
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

/// Even-odd rule with a horizontal ray towards +x. Points lying exactly on
/// an edge are inside.
pub fn point_in_polygon(p: [f64; 2], poly: &Polygon) -> bool {
    let mut inside = false;
    for (a, b) in poly.edges() {
        if on_segment(p, a, b) {
            return true;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x_cross = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Ids of the rows whose `(x, y)` point lies in `poly`.
pub fn lasso_select(
    points: &Matrix,
    row_ids: &[RowId],
    poly: &Polygon,
) -> Result<BTreeSet<RowId>, AnalyticsError> {
    if points.cols() != 2 {
        return Err(AnalyticsError::NotTwoDimensional(points.cols()));
    }
    if points.rows() != row_ids.len() {
        return Err(AnalyticsError::LengthMismatch {
            points: points.rows(),
            ids: row_ids.len(),
        });
    }
    Ok(points
        .row_iter()
        .zip(row_ids)
        .filter(|(p, _)| point_in_polygon([p[0], p[1]], poly))
        .map(|(_, id)| *id)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn square_inside_outside() {
        let sq = unit_square();
        assert!(point_in_polygon([0.5, 0.5], &sq));
        assert!(!point_in_polygon([2.0, 0.5], &sq));
        assert!(!point_in_polygon([-0.1, 0.5], &sq));
    }

    #[test]
    fn boundary_counts_as_inside() {
        let sq = unit_square();
        for p in [[0.0, 0.0], [1.0, 0.5], [0.5, 1.0], [0.0, 0.3], [1.0, 1.0]] {
            assert!(point_in_polygon(p, &sq), "{p:?}");
        }
    }

    #[test]
    fn degenerate_polygon_contains_only_boundary() {
        let line = Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        assert!(point_in_polygon([1.5, 0.0], &line));
        assert!(!point_in_polygon([1.5, 0.1], &line));
        assert!(!point_in_polygon([3.0, 0.0], &line));
    }

    #[test]
    fn polygon_cleanup() {
        let p = Polygon::new(vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(p.vertices().len(), 3);
        assert_eq!(
            Polygon::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 1.0]]),
            Err(PolygonError::TooFewVertices(2))
        );
        assert_eq!(
            Polygon::new(vec![[0.0, 0.0], [f64::NAN, 1.0], [1.0, 1.0]]),
            Err(PolygonError::NonFinite(1))
        );
    }

    #[test]
    fn triangle_selects_two_of_three() {
        let tri = Polygon::new(vec![[-1.0, -1.0], [5.0, -1.0], [-1.0, 5.0]]).unwrap();
        let pts = Matrix::from_rows(&[[0.0, 0.0], [10.0, 10.0], [1.0, 1.0]]).unwrap();
        let ids = [RowId(10), RowId(11), RowId(12)];
        let sel = lasso_select(&pts, &ids, &tri).unwrap();
        assert_eq!(sel.into_iter().collect::<Vec<_>>(), vec![RowId(10), RowId(12)]);
    }

    #[test]
    fn empty_selection_and_errors() {
        let tri = Polygon::new(vec![[100.0, 100.0], [101.0, 100.0], [100.0, 101.0]]).unwrap();
        let pts = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(lasso_select(&pts, &[RowId(0), RowId(1)], &tri).unwrap().is_empty());
        assert_eq!(
            lasso_select(&pts, &[RowId(0)], &tri),
            Err(AnalyticsError::LengthMismatch { points: 2, ids: 1 })
        );
    }
}
