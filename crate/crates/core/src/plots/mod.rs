//! Declarative plot specifications for the built-in plot kinds.
//!
//! A [`PlotSpec`] carries resolved data only, so a renderer never needs the
//! table. Its JSON layout is described in `docs/plotspec.schema.json`.

mod aggregate;
mod binning;
mod color;
mod config;
mod spec;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::table::{ColumnKind, RowId};

pub use self::aggregate::{group_aggregate, paginate, Aggregate, GroupValue};
pub use self::binning::{bin2d, bin_histogram, Grid2D, Histogram};
pub use self::color::{ColorAssignment, PALETTE, PALETTE_WRAP_WARNING};
pub use self::config::{
    builtin_schema, validate_builtin, BarplotConfig, Builtins, ConfigSchema, ConfigValidator, CustomConfig,
    FieldSpec, FieldType, HeatmapConfig, HistogramConfig, PlotConfig, ScatterConfig, SmilesConfig, SmilesMode,
    TableConfig, BUILTIN_KINDS,
};
pub use self::spec::{build_plot_spec, cluster_colors, hints_for, ClusterColors};

pub const PLOTSPEC_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlotError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{column}` has unsuitable kind {}", found.as_str())]
    KindMismatch { column: String, found: ColumnKind },
    #[error("invalid setting `{field}`: {reason}")]
    InvalidSetting { field: String, reason: String },
    #[error("unknown plot kind `{0}`")]
    UnknownKind(String),
    #[error("unknown row {0}")]
    UnknownRow(RowId),
    #[error("no data")]
    NoData,
    #[error("length mismatch: {expected} vs {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("unknown aggregate `{0}`")]
    UnknownAggregate(String),
}

/// Linked-view state shared by all plots of a session.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionState {
    #[serde(default)]
    pub active_cluster_column: Option<String>,
    #[serde(default)]
    pub selection: BTreeSet<RowId>,
    #[serde(default)]
    pub hovered: Option<RowId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Hover,
    Selection,
    Lasso,
    Clusters,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InteractionHints {
    pub emits: Vec<Channel>,
    pub consumes: Vec<Channel>,
}

impl InteractionHints {
    pub fn consumes(&self, c: Channel) -> bool {
        self.consumes.contains(&c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub schema_version: u32,
    pub plot_id: String,
    pub kind: String,
    pub series: Value,
    pub encodings: Value,
    pub interaction_hints: InteractionHints,
    pub warnings: Vec<String>,
}
