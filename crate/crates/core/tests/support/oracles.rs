//! Independent reference implementations shared by the integration tests and
//! the acceptance suite. Nothing here calls into the code under test except
//! to convert inputs.

#![allow(dead_code)]

use linkplot_core::analytics::{Clustering, Embedding2D};
use linkplot_core::matrix::Matrix;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

// PCA

pub struct PcaReference {
    pub variances: [f64; 2],
    /// Unit eigenvectors of the two largest eigenvalues.
    pub components: [Vec<f64>; 2],
    /// All eigenvalues, nonincreasing.
    pub spectrum: Vec<f64>,
    pub covariance: DMatrix<f64>,
}

/// Relative eigenvalue separation below which an eigenvector is not unique.
pub const DEGENERATE_GAP: f64 = 1e-6;

/// Eigendecomposition of the sample covariance by nalgebra.
pub fn pca_reference(data: &Matrix) -> PcaReference {
    let (n, d) = (data.rows(), data.cols());
    let x = DMatrix::from_row_slice(n, d, data.as_slice());
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vec_of = |k: usize| eig.eigenvectors.column(order[k]).iter().copied().collect::<Vec<_>>();
    PcaReference {
        variances: [eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]],
        components: [vec_of(0), vec_of(1)],
        spectrum: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        covariance: cov,
    }
}

/// Largest absolute deviation between `e` and the reference. Components are
/// compared up to sign; a component whose eigenvalue is repeated is only
/// required to be a unit eigenvector for that eigenvalue.
pub fn pca_deviation(e: &Embedding2D, r: &PcaReference) -> f64 {
    let mut worst: f64 = 0.0;
    let scale = r.spectrum[0].abs().max(1.0);
    for c in 0..2 {
        worst = worst.max((e.explained_variance[c] - r.variances[c]).abs());
        let got = e.components.row(c);
        let gap = r
            .spectrum
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != c)
            .map(|(_, v)| (v - r.spectrum[c]).abs())
            .fold(f64::INFINITY, f64::min);
        if gap < DEGENERATE_GAP * scale {
            let v = nalgebra::DVector::from_column_slice(got);
            let residual = (&r.covariance * &v - &v * r.spectrum[c]).amax();
            worst = worst.max(residual).max((v.norm() - 1.0).abs());
            continue;
        }
        let same: f64 = got.iter().zip(&r.components[c]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let flipped: f64 = got.iter().zip(&r.components[c]).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
        worst = worst.max(same.min(flipped));
    }
    worst
}

/// `n x d` matrix with per-column scales so the spectrum is rarely degenerate.
pub fn random_matrix(rng: &mut impl Rng, n: usize, d: usize) -> Matrix {
    let scales: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..5.0)).collect();
    let mixing: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let shared: f64 = rng.random_range(-1.0..1.0);
        for j in 0..d {
            data.push(scales[j] * rng.random_range(-1.0..1.0) + mixing[j] * shared * 3.0);
        }
    }
    Matrix::new(n, d, data).unwrap()
}

// k-means

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

pub fn inertia(data: &Matrix, c: &Clustering) -> f64 {
    data.row_iter()
        .zip(&c.assignments)
        .map(|(p, &a)| sq_dist(p, c.centroids.row(a)))
        .sum()
}

/// Each centroid is the mean of its members and each point sits in a
/// nearest cluster.
pub fn check_fixed_point(data: &Matrix, c: &Clustering, tol: f64) -> Result<(), String> {
    let d = data.cols();
    for j in 0..c.k {
        let members: Vec<&[f64]> = data
            .row_iter()
            .zip(&c.assignments)
            .filter(|(_, &a)| a == j)
            .map(|(p, _)| p)
            .collect();
        if members.is_empty() {
            return Err(format!("cluster {j} is empty"));
        }
        for t in 0..d {
            let mean = members.iter().map(|p| p[t]).sum::<f64>() / members.len() as f64;
            if (mean - c.centroids.get(j, t)).abs() > tol * mean.abs().max(1.0) {
                return Err(format!("centroid {j} is not the mean of its members"));
            }
        }
    }
    for (i, p) in data.row_iter().enumerate() {
        let own = sq_dist(p, c.centroids.row(c.assignments[i]));
        let best = (0..c.k).map(|j| sq_dist(p, c.centroids.row(j))).fold(f64::INFINITY, f64::min);
        if own > best + tol * best.max(1.0) {
            return Err(format!("row {i} is not assigned to a nearest centroid"));
        }
    }
    Ok(())
}

/// Two well separated Gaussian-ish blobs; returns the data and true labels.
pub fn two_blobs(rng: &mut impl Rng, per_blob: usize, d: usize) -> (Matrix, Vec<usize>) {
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (label, center) in [(0usize, -10.0), (1, 10.0)] {
        for _ in 0..per_blob {
            for _ in 0..d {
                data.push(center + rng.random_range(-1.0..1.0));
            }
            labels.push(label);
        }
    }
    (Matrix::new(2 * per_blob, d, data).unwrap(), labels)
}

/// Fraction of rows whose predicted cluster agrees with the majority label
/// of that cluster.
pub fn purity(predicted: &[usize], truth: &[usize]) -> f64 {
    let k = predicted.iter().max().map_or(0, |m| m + 1);
    let t = truth.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0usize; t]; k];
    for (p, l) in predicted.iter().zip(truth) {
        table[*p][*l] += 1;
    }
    let hits: usize = table.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum();
    hits as f64 / predicted.len() as f64
}

// Polygons, in exact integer arithmetic. Coordinates are in half units so
// that the f64 values handed to the code under test are exact.

pub type IPoint = [i64; 2];

fn cross(o: IPoint, a: IPoint, b: IPoint) -> i64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment_exact(p: IPoint, a: IPoint, b: IPoint) -> bool {
    cross(a, b, p) == 0
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn segments_intersect(a: IPoint, b: IPoint, c: IPoint, d: IPoint) -> bool {
    let (d1, d2) = (cross(c, d, a), cross(c, d, b));
    let (d3, d4) = (cross(a, b, c), cross(a, b, d));
    if ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)) {
        return true;
    }
    on_segment_exact(a, c, d) || on_segment_exact(b, c, d) || on_segment_exact(c, a, b) || on_segment_exact(d, a, b)
}

pub fn is_simple(poly: &[IPoint]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (a, b, c, d) = (poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]);
            if adjacent {
                // Neighbouring edges may only share their common vertex.
                let shared = if j == i + 1 { b } else { a };
                let (far_a, far_b) = if j == i + 1 { (a, d) } else { (b, c) };
                if cross(far_a, shared, far_b) == 0 {
                    return false;
                }
            } else if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Random simple polygon with 3..=max_vertices vertices on the half-unit grid
/// within `[-extent, extent]`.
pub fn random_simple_polygon(rng: &mut impl Rng, max_vertices: usize, extent: i64) -> Vec<IPoint> {
    loop {
        let n = rng.random_range(3..=max_vertices);
        let cx = rng.random_range(-extent / 4..=extent / 4) as f64;
        let cy = rng.random_range(-extent / 4..=extent / 4) as f64;
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let poly: Vec<IPoint> = angles
            .iter()
            .map(|a| {
                let r = rng.random_range(0.2..1.0) * (extent as f64) * 0.7;
                [(cx + r * a.cos()).round() as i64, (cy + r * a.sin()).round() as i64]
            })
            .collect();
        if is_simple(&poly) {
            return poly;
        }
    }
}

/// Winding-number containment; points on an edge count as inside.
pub fn winding_contains(p: IPoint, poly: &[IPoint]) -> bool {
    let n = poly.len();
    let mut winding = 0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if on_segment_exact(p, a, b) {
            return true;
        }
        if a[1] <= p[1] {
            if b[1] > p[1] && cross(a, b, p) > 0 {
                winding += 1;
            }
        } else if b[1] <= p[1] && cross(a, b, p) < 0 {
            winding -= 1;
        }
    }
    winding != 0
}

pub fn to_f64(p: IPoint) -> [f64; 2] {
    [p[0] as f64 / 2.0, p[1] as f64 / 2.0]
}
