//! Lloyd's algorithm with k-means++ seeding.
//!
//! Seeding uses ChaCha8 seeded from the caller's `seed`, so the same
//! `(data, k, seed)` always produces the same clustering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::AnalyticsError;
use crate::matrix::Matrix;

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub k: usize,
    /// Cluster index per input row.
    pub assignments: Vec<usize>,
    pub centroids: Matrix,
    /// Sum of squared distances from each row to its assigned centroid.
    pub inertia: f64,
    pub seed: u64,
    pub iterations: usize,
}

pub fn kmeans(data: &Matrix, k: usize, seed: u64) -> Result<Clustering, AnalyticsError> {
    kmeans_traced(data, k, seed).map(|(c, _)| c)
}

/// Like [`kmeans`], also returning the inertia after every assignment step
/// (the first entry is the inertia of the seeding assignment).
pub fn kmeans_traced(
    data: &Matrix,
    k: usize,
    seed: u64,
) -> Result<(Clustering, Vec<f64>), AnalyticsError> {
    let n = data.rows();
    if n == 0 {
        return Err(AnalyticsError::EmptyData);
    }
    if k == 0 {
        return Err(AnalyticsError::ZeroClusters);
    }
    if k > n {
        return Err(AnalyticsError::KTooLarge { k, n });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_plus_plus(data, k, &mut rng);
    let mut assignments = vec![0; n];
    let mut inertia = assign(data, &centroids, &mut assignments);
    let mut trace = vec![inertia];

    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        update_centroids(data, &mut centroids, &mut assignments);
        let previous = assignments.clone();
        let next = assign(data, &centroids, &mut assignments);
        debug_assert!(
            next <= inertia + 1e-9 * inertia.max(1.0),
            "inertia increased: {inertia} -> {next}"
        );
        inertia = next;
        trace.push(inertia);
        if assignments == previous {
            break;
        }
    }

    Ok((
        Clustering {
            k,
            assignments,
            centroids,
            inertia,
            seed,
            iterations,
        },
        trace,
    ))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the closest centroid; ties go to the lowest index.
fn nearest(point: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.row_iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn seed_plus_plus(data: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = data.rows();
    let mut centroids = Matrix::zeros(k, data.cols());
    let mut chosen = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    chosen.push(first);
    centroids.row_mut(0).copy_from_slice(data.row(first));
    let mut dist: Vec<f64> = data.row_iter().map(|p| sq_dist(p, data.row(first))).collect();

    for j in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, d) in dist.iter().enumerate() {
                acc += d;
                if *d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` just past the final sum.
            pick.unwrap_or_else(|| dist.iter().rposition(|d| *d > 0.0).unwrap())
        } else {
            // Every point coincides with a centroid: take any unchosen row.
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(pick);
        centroids.row_mut(j).copy_from_slice(data.row(pick));
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(sq_dist(data.row(i), data.row(pick)));
        }
    }
    centroids
}

fn assign(data: &Matrix, centroids: &Matrix, assignments: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, p) in data.row_iter().enumerate() {
        let (j, d) = nearest(p, centroids);
        assignments[i] = j;
        inertia += d;
    }
    inertia
}

/// Moves every centroid to the mean of its members. An empty cluster takes
/// over the point farthest from its own centroid (among clusters with more
/// than one member) and is centered on it.
fn update_centroids(data: &Matrix, centroids: &mut Matrix, assignments: &mut [usize]) {
    let k = centroids.rows();
    let d = data.cols();
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (p, &a) in data.row_iter().zip(assignments.iter()) {
        counts[a] += 1;
        for (s, v) in sums[a * d..(a + 1) * d].iter_mut().zip(p) {
            *s += v;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            let c = counts[j] as f64;
            for (dst, s) in centroids.row_mut(j).iter_mut().zip(&sums[j * d..(j + 1) * d]) {
                *dst = s / c;
            }
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for (i, p) in data.row_iter().enumerate() {
            let a = assignments[i];
            if counts[a] < 2 {
                continue;
            }
            let dist = sq_dist(p, centroids.row(a));
            if far.is_none_or(|(_, best)| dist > best) {
                far = Some((i, dist));
            }
        }
        let Some((i, _)) = far else { continue };
        counts[assignments[i]] -= 1;
        assignments[i] = j;
        counts[j] = 1;
        let point = data.row(i).to_vec();
        centroids.row_mut(j).copy_from_slice(&point);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inertia_of(data: &Matrix, c: &Clustering) -> f64 {
        data.row_iter()
            .zip(&c.assignments)
            .map(|(p, &a)| sq_dist(p, c.centroids.row(a)))
            .sum()
    }

    #[test]
    fn k1_is_column_mean() {
        let data = Matrix::from_rows(&[[0.0, 1.0], [2.0, 3.0], [4.0, 8.0]]).unwrap();
        let c = kmeans(&data, 1, 7).unwrap();
        assert!(c.assignments.iter().all(|&a| a == 0));
        assert_eq!(c.centroids.row(0), &[2.0, 4.0]);
        let total: f64 = [4.0 + 9.0, 0.0 + 1.0, 4.0 + 16.0].iter().sum();
        assert!((c.inertia - total).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n_isolates_points() {
        let data = Matrix::from_rows(&[[0.0], [1.0], [5.0], [9.0]]).unwrap();
        let c = kmeans(&data, 4, 3).unwrap();
        let mut seen = c.assignments.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 4);
        assert_eq!(c.inertia, 0.0);
    }

    #[test]
    fn errors() {
        let data = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert_eq!(kmeans(&data, 3, 0), Err(AnalyticsError::KTooLarge { k: 3, n: 2 }));
        assert_eq!(kmeans(&data, 0, 0), Err(AnalyticsError::ZeroClusters));
        let empty = Matrix::new(0, 2, vec![]).unwrap();
        assert_eq!(kmeans(&empty, 1, 0), Err(AnalyticsError::EmptyData));
    }

    #[test]
    fn duplicate_points_terminate() {
        let data = Matrix::from_rows(&[[1.0, 1.0]; 5]).unwrap();
        let c = kmeans(&data, 3, 11).unwrap();
        assert_eq!(c.inertia, 0.0);
        assert!(c.iterations <= MAX_ITERATIONS);
    }

    #[test]
    fn inertia_matches_recomputation() {
        let rows: Vec<[f64; 3]> = (0..40)
            .map(|i| {
                let t = i as f64;
                [(t * 0.7).sin() * 3.0, (t * 1.3).cos(), t % 5.0]
            })
            .collect();
        let data = Matrix::from_rows(&rows).unwrap();
        let c = kmeans(&data, 4, 99).unwrap();
        let recomputed = inertia_of(&data, &c);
        assert!((c.inertia - recomputed).abs() <= 1e-9 * recomputed.max(1e-300));
    }
}
