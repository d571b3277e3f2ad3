//! Interactive numerical procedures: k-means, 2-component PCA and lasso
//! selection. Everything here is a pure function of its inputs.

mod kmeans;
mod lasso;
mod pca;

use thiserror::Error;

pub use self::kmeans::{kmeans, kmeans_traced, Clustering, MAX_ITERATIONS};
pub use self::lasso::{lasso_select, point_in_polygon, Polygon, PolygonError};
pub use self::pca::{pca2, symmetric_eigen, Embedding2D};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("no data rows")]
    EmptyData,
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("k = {k} exceeds the number of rows ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("PCA needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("PCA needs at least 2 columns, got {0}")]
    TooFewColumns(usize),
    #[error("{points} points but {ids} row ids")]
    LengthMismatch { points: usize, ids: usize },
    #[error("lasso points must have 2 columns, got {0}")]
    NotTwoDimensional(usize),
}
