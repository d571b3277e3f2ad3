//! Shared, immutable columnar dataset.
//!
//! A [`Table`] holds the uploaded dataset columns plus auxiliary columns
//! produced during a session (cluster labels, embeddings, user columns).
//! Tables are cheap to clone; every "mutation" returns a new value.

mod column;
mod csv;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

pub use self::column::{Cell, Column, ColumnData, ColumnKind};
pub use self::csv::{parse_csv, parse_delimited, to_csv, to_debug_json};
#[cfg(feature = "extended-formats")]
pub use self::csv::parse_json_records;

/// Stable identifier of a row. Assigned `0..row_count` at load time and
/// never reassigned afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RowId(pub u64);

impl fmt::Display for RowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("input has no header row")]
    EmptyInput,
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("input is not valid UTF-8 (byte offset {offset})")]
    EncodingError { offset: usize },
    #[error("line {line}: malformed quoted field")]
    MalformedQuote { line: usize },
    #[error("invalid header field {index}: {reason}")]
    InvalidHeader { index: usize, reason: String },
    #[error("column `{name}` has length {found}, table has {expected} rows")]
    LengthMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("duplicate row id {0}")]
    DuplicateRowId(RowId),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` is not numeric")]
    NonNumericColumn(String),
    #[error("no columns selected")]
    NoColumnsSelected,
    #[error("no row has values in every selected column")]
    NoCompleteRows,
    #[error("malformed records: {0}")]
    MalformedRecords(String),
}

/// Where an auxiliary column came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxOrigin {
    Cluster,
    EmbeddingX,
    EmbeddingY,
    Selection,
    User,
}

/// Label used for rows that belong to no explicit cluster. Never stored.
pub const IMPLICIT_CLUSTER_LABEL: &str = "all";

/// Column derived during a session rather than loaded from the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxColumn {
    pub origin: AuxOrigin,
    pub column: Column,
}

impl AuxColumn {
    pub fn new(origin: AuxOrigin, column: Column) -> Self {
        Self { origin, column }
    }

    pub fn name(&self) -> &str {
        self.column.name()
    }

    /// Cluster column labelled `c1..ck`; `assignments[i] = None` leaves row `i`
    /// in the implicit default cluster.
    pub fn clusters(name: impl Into<String>, k: usize, assignments: &[Option<usize>]) -> Self {
        let categories = (1..=k).map(|i| format!("c{i}")).collect();
        let codes = assignments.iter().map(|a| a.map(|c| c as u32)).collect();
        let column = Column::categorical_with_dictionary(name, categories, codes)
            .expect("cluster codes are below k");
        Self::new(AuxOrigin::Cluster, column)
    }
}

/// Immutable dataset shared by every plot in a session.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    row_ids: Arc<Vec<RowId>>,
    columns: Arc<Vec<Column>>,
    aux: Vec<Arc<AuxColumn>>,
}

impl Default for Table {
    fn default() -> Self {
        Self {
            row_ids: Arc::new(Vec::new()),
            columns: Arc::new(Vec::new()),
            aux: Vec::new(),
        }
    }
}

impl Table {
    /// Table with row ids `0..n` where `n` is the common column length.
    pub fn from_columns(columns: Vec<Column>) -> Result<Self, TableError> {
        let n = columns.first().map_or(0, Column::len);
        let row_ids = (0..n as u64).map(RowId).collect();
        Self::new(row_ids, columns, Vec::new())
    }

    pub fn new(
        row_ids: Vec<RowId>,
        columns: Vec<Column>,
        aux: Vec<AuxColumn>,
    ) -> Result<Self, TableError> {
        let n = row_ids.len();
        let mut seen_ids = HashSet::with_capacity(n);
        for id in &row_ids {
            if !seen_ids.insert(*id) {
                return Err(TableError::DuplicateRowId(*id));
            }
        }
        let mut names = HashSet::new();
        for c in columns.iter().chain(aux.iter().map(|a| &a.column)) {
            if c.name().is_empty() {
                return Err(TableError::InvalidHeader {
                    index: 0,
                    reason: "empty column name".into(),
                });
            }
            if !names.insert(c.name()) {
                return Err(TableError::DuplicateColumn(c.name().to_owned()));
            }
            if c.len() != n {
                return Err(TableError::LengthMismatch {
                    name: c.name().to_owned(),
                    expected: n,
                    found: c.len(),
                });
            }
        }
        Ok(Self {
            row_ids: Arc::new(row_ids),
            columns: Arc::new(columns),
            aux: aux.into_iter().map(Arc::new).collect(),
        })
    }

    pub fn row_count(&self) -> usize {
        self.row_ids.len()
    }

    pub fn row_ids(&self) -> &[RowId] {
        &self.row_ids
    }

    pub fn row_index(&self, id: RowId) -> Option<usize> {
        // Ids are 0..n unless the table came from a session file.
        let guess = id.0 as usize;
        if self.row_ids.get(guess) == Some(&id) {
            return Some(guess);
        }
        self.row_ids.iter().position(|r| *r == id)
    }

    pub fn dataset_columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn aux_columns(&self) -> impl Iterator<Item = &AuxColumn> {
        self.aux.iter().map(|a| a.as_ref())
    }

    /// Dataset columns followed by aux columns.
    pub fn columns(&self) -> impl Iterator<Item = &Column> {
        self.columns
            .iter()
            .chain(self.aux.iter().map(|a| &a.column))
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns().find(|c| c.name() == name)
    }

    pub fn aux(&self, name: &str) -> Option<&AuxColumn> {
        self.aux_columns().find(|a| a.name() == name)
    }

    /// Name an aux column requested as `requested` will be exposed under.
    /// Collisions with dataset columns get a `_aux`, `_aux2`, ... suffix.
    pub fn resolve_aux_name(&self, requested: &str) -> String {
        let taken = |n: &str| self.columns.iter().any(|c| c.name() == n);
        if !taken(requested) {
            return requested.to_owned();
        }
        let mut i = 1;
        loop {
            let candidate = if i == 1 {
                format!("{requested}_aux")
            } else {
                format!("{requested}_aux{i}")
            };
            if !taken(&candidate) {
                return candidate;
            }
            i += 1;
        }
    }

    /// Returns a table that also exposes `aux`. An aux column with the same
    /// (resolved) name is replaced; `self` is left untouched.
    pub fn attach_aux(&self, aux: AuxColumn) -> Result<Table, TableError> {
        if aux.column.len() != self.row_count() {
            return Err(TableError::LengthMismatch {
                name: aux.name().to_owned(),
                expected: self.row_count(),
                found: aux.column.len(),
            });
        }
        if aux.name().is_empty() {
            return Err(TableError::InvalidHeader {
                index: 0,
                reason: "empty column name".into(),
            });
        }
        let resolved = self.resolve_aux_name(aux.name());
        let aux = AuxColumn {
            origin: aux.origin,
            column: aux.column.renamed(resolved),
        };
        let mut next = self.clone();
        match next.aux.iter().position(|a| a.name() == aux.name()) {
            Some(i) => next.aux[i] = Arc::new(aux),
            None => next.aux.push(Arc::new(aux)),
        }
        debug_assert!(next.columns().all(|c| c.len() == next.row_count()));
        Ok(next)
    }

    /// Table without the named aux column (no-op if absent).
    pub fn detach_aux(&self, name: &str) -> Table {
        let mut next = self.clone();
        next.aux.retain(|a| a.name() != name);
        next
    }

    /// Dense matrix of the named numeric columns over the rows that have a
    /// value in every one of them, plus the ids of those rows.
    pub fn numeric_matrix<S: AsRef<str>>(
        &self,
        column_names: &[S],
    ) -> Result<(Matrix, Vec<RowId>), TableError> {
        if column_names.is_empty() {
            return Err(TableError::NoColumnsSelected);
        }
        let mut cols = Vec::with_capacity(column_names.len());
        for name in column_names {
            let name = name.as_ref();
            let col = self
                .column(name)
                .ok_or_else(|| TableError::UnknownColumn(name.to_owned()))?;
            let values = col
                .numbers()
                .ok_or_else(|| TableError::NonNumericColumn(name.to_owned()))?;
            cols.push(values);
        }
        let mut data = Vec::new();
        let mut kept = Vec::new();
        'rows: for (i, id) in self.row_ids.iter().enumerate() {
            let start = data.len();
            for col in &cols {
                match col[i] {
                    Some(v) => data.push(v),
                    None => {
                        data.truncate(start);
                        continue 'rows;
                    }
                }
            }
            kept.push(*id);
        }
        if kept.is_empty() {
            return Err(TableError::NoCompleteRows);
        }
        let m = Matrix::new(kept.len(), cols.len(), data).expect("finite by column invariant");
        Ok((m, kept))
    }
}
