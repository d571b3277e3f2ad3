//! Two-component PCA via eigendecomposition of the sample covariance.

use super::AnalyticsError;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding2D {
    /// `n x 2` projected coordinates.
    pub coords: Matrix,
    /// `2 x d`, orthonormal rows.
    pub components: Matrix,
    /// Variance along each component, nonincreasing.
    pub explained_variance: [f64; 2],
    pub mean: Vec<f64>,
}

pub fn pca2(data: &Matrix) -> Result<Embedding2D, AnalyticsError> {
    let (n, d) = (data.rows(), data.cols());
    if n < 2 {
        return Err(AnalyticsError::TooFewRows(n));
    }
    if d < 2 {
        return Err(AnalyticsError::TooFewColumns(d));
    }
    let mean = data.column_means();

    let mut cov = vec![0.0; d * d];
    for row in data.row_iter() {
        for i in 0..d {
            let ci = row[i] - mean[i];
            for j in i..d {
                cov[i * d + j] += ci * (row[j] - mean[j]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            cov[i * d + j] /= denom;
            cov[j * d + i] = cov[i * d + j];
        }
    }
    let total_variance: f64 = (0..d).map(|i| cov[i * d + i]).sum();

    if total_variance == 0.0 {
        let mut components = Matrix::zeros(2, d);
        components.set(0, 0, 1.0);
        components.set(1, 1, 1.0);
        return Ok(Embedding2D {
            coords: Matrix::zeros(n, 2),
            components,
            explained_variance: [0.0, 0.0],
            mean,
        });
    }

    let (values, vectors) = symmetric_eigen(&cov, d);
    let mut components = Matrix::zeros(2, d);
    for c in 0..2 {
        let mut v: Vec<f64> = (0..d).map(|r| vectors[r * d + c]).collect();
        normalize_sign(&mut v);
        components.row_mut(c).copy_from_slice(&v);
    }
    let explained_variance = [values[0].max(0.0), values[1].max(0.0)];

    let mut coords = Matrix::zeros(n, 2);
    for (i, row) in data.row_iter().enumerate() {
        for c in 0..2 {
            let proj = row
                .iter()
                .zip(&mean)
                .zip(components.row(c))
                .map(|((x, m), w)| (x - m) * w)
                .sum();
            coords.set(i, c, proj);
        }
    }

    Ok(Embedding2D {
        coords,
        components,
        explained_variance,
        mean,
    })
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
fn normalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric `d x d` row-major matrix.
///
/// Returns eigenvalues sorted in nonincreasing order (stable on ties) and the
/// eigenvectors as the columns of a row-major `d x d` matrix in that order.
pub fn symmetric_eigen(a: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), d * d);
    let mut m = a.to_vec();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }

    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * d + j] * m[i * d + j])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-3 * scale || off == 0.0 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * d + p];
                let aqq = m[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..d {
                    let mkp = m[k * d + p];
                    let mkq = m[k * d + q];
                    m[k * d + p] = c * mkp - s * mkq;
                    m[k * d + q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let mpk = m[p * d + k];
                    let mqk = m[q * d + k];
                    m[p * d + k] = c * mpk - s * mqk;
                    m[q * d + k] = s * mpk + c * mqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[j * d + j].total_cmp(&m[i * d + i]));
    let values = order.iter().map(|&i| m[i * d + i]).collect();
    let mut vectors = vec![0.0; d * d];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..d {
            vectors[r * d + new_col] = v[r * d + old_col];
        }
    }
    (values, vectors)
}
