use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use super::{Aggregate, PlotError};
use crate::table::{ColumnKind, RowId, Table};

pub const BUILTIN_KINDS: [&str; 6] = ["scatter", "histogram", "heatmap", "barplot", "table", "smiles"];

fn default_bins() -> usize {
    20
}

fn default_grid() -> usize {
    32
}

fn default_page_size() -> usize {
    25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterConfig {
    pub x_column: String,
    pub y_column: String,
    /// Column driving colour; the active cluster column when absent.
    #[serde(default)]
    pub color_by: Option<String>,
    #[serde(default)]
    pub symbol_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    pub column: String,
    #[serde(default = "default_bins")]
    pub bin_count: usize,
    #[serde(default)]
    pub split_by_cluster: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapConfig {
    pub x_column: String,
    pub y_column: String,
    #[serde(default = "default_grid")]
    pub x_bins: usize,
    #[serde(default = "default_grid")]
    pub y_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarplotConfig {
    pub value_column: String,
    /// Grouping column; the active cluster column when absent.
    #[serde(default)]
    pub group_by: Option<String>,
    #[serde(default)]
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    #[serde(default = "default_page_size")]
    pub page_size: usize,
    #[serde(default)]
    pub sort_column: Option<String>,
    #[serde(default)]
    pub page: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmilesMode {
    #[default]
    HoverFollow,
    Pinned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmilesConfig {
    pub smiles_column: String,
    #[serde(default)]
    pub mode: SmilesMode,
    /// Row shown in pinned mode.
    #[serde(default)]
    pub pinned_row: Option<RowId>,
}

/// Settings of a plugin-provided plot kind, validated against its schema.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomConfig {
    pub kind: String,
    pub settings: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlotConfig {
    Scatter(ScatterConfig),
    Histogram(HistogramConfig),
    Heatmap(HeatmapConfig),
    Barplot(BarplotConfig),
    Table(TableConfig),
    Smiles(SmilesConfig),
    Custom(CustomConfig),
}

impl PlotConfig {
    pub fn kind(&self) -> &str {
        match self {
            PlotConfig::Scatter(_) => "scatter",
            PlotConfig::Histogram(_) => "histogram",
            PlotConfig::Heatmap(_) => "heatmap",
            PlotConfig::Barplot(_) => "barplot",
            PlotConfig::Table(_) => "table",
            PlotConfig::Smiles(_) => "smiles",
            PlotConfig::Custom(c) => &c.kind,
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, PlotConfig::Custom(_))
    }

    /// Settings as a JSON object, without the `kind` tag.
    pub fn settings(&self) -> Map<String, Value> {
        let value = match self {
            PlotConfig::Scatter(c) => serde_json::to_value(c),
            PlotConfig::Histogram(c) => serde_json::to_value(c),
            PlotConfig::Heatmap(c) => serde_json::to_value(c),
            PlotConfig::Barplot(c) => serde_json::to_value(c),
            PlotConfig::Table(c) => serde_json::to_value(c),
            PlotConfig::Smiles(c) => serde_json::to_value(c),
            PlotConfig::Custom(c) => return c.settings.clone(),
        };
        match value.expect("config structs serialize") {
            Value::Object(map) => map,
            _ => unreachable!("config structs serialize to objects"),
        }
    }

    pub fn from_value(value: Value) -> Result<Self, PlotError> {
        let Value::Object(mut map) = value else {
            return Err(PlotError::InvalidSetting {
                field: "kind".into(),
                reason: "config must be an object".into(),
            });
        };
        let kind = match map.remove("kind") {
            Some(Value::String(k)) if !k.is_empty() => k,
            _ => {
                return Err(PlotError::InvalidSetting {
                    field: "kind".into(),
                    reason: "missing or non-string kind".into(),
                })
            }
        };
        fn typed<T: serde::de::DeserializeOwned>(map: Map<String, Value>) -> Result<T, PlotError> {
            serde_json::from_value(Value::Object(map)).map_err(|e| PlotError::InvalidSetting {
                field: "settings".into(),
                reason: e.to_string(),
            })
        }
        Ok(match kind.as_str() {
            "scatter" => PlotConfig::Scatter(typed(map)?),
            "histogram" => PlotConfig::Histogram(typed(map)?),
            "heatmap" => PlotConfig::Heatmap(typed(map)?),
            "barplot" => PlotConfig::Barplot(typed(map)?),
            "table" => PlotConfig::Table(typed(map)?),
            "smiles" => PlotConfig::Smiles(typed(map)?),
            _ => PlotConfig::Custom(CustomConfig { kind, settings: map }),
        })
    }

    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("kind".into(), Value::String(self.kind().to_string()));
        map.extend(self.settings());
        Value::Object(map)
    }
}

impl Serialize for PlotConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PlotConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        PlotConfig::from_value(Value::deserialize(d)?).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FieldType {
    Column { kinds: Vec<ColumnKind> },
    Integer { min: i64 },
    Boolean,
    Choice { options: Vec<String> },
    RowId,
    String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    #[serde(flatten)]
    pub field_type: FieldType,
    #[serde(default)]
    pub required: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<Value>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

impl FieldSpec {
    pub fn new(name: &str, field_type: FieldType) -> Self {
        Self {
            name: name.to_string(),
            field_type,
            required: false,
            default: None,
            description: String::new(),
        }
    }

    pub fn required(mut self) -> Self {
        self.required = true;
        self
    }

    pub fn default_value(mut self, v: Value) -> Self {
        self.default = Some(v);
        self
    }

    pub fn describe(mut self, text: &str) -> Self {
        self.description = text.to_string();
        self
    }
}

/// Describes the settings of one plot kind. Drives both validation and the
/// configuration forms of a client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSchema {
    pub kind: String,
    pub fields: Vec<FieldSpec>,
}

fn column_field(name: &str, kinds: &[ColumnKind]) -> FieldSpec {
    FieldSpec::new(name, FieldType::Column { kinds: kinds.to_vec() })
}

const NUMERIC: &[ColumnKind] = &[ColumnKind::Numeric];
const ANY: &[ColumnKind] = &[ColumnKind::Numeric, ColumnKind::Categorical, ColumnKind::Text];
const LABELS: &[ColumnKind] = &[ColumnKind::Categorical, ColumnKind::Text];

pub fn builtin_schema(kind: &str) -> Option<ConfigSchema> {
    use serde_json::json;
    let fields = match kind {
        "scatter" => vec![
            column_field("x_column", NUMERIC).required(),
            column_field("y_column", NUMERIC).required(),
            column_field("color_by", ANY).describe("defaults to the active cluster column"),
            column_field("symbol_by", &[ColumnKind::Categorical]),
        ],
        "histogram" => vec![
            column_field("column", NUMERIC).required(),
            FieldSpec::new("bin_count", FieldType::Integer { min: 1 }).default_value(json!(20)),
            FieldSpec::new("split_by_cluster", FieldType::Boolean).default_value(json!(false)),
        ],
        "heatmap" => vec![
            column_field("x_column", NUMERIC).required(),
            column_field("y_column", NUMERIC).required(),
            FieldSpec::new("x_bins", FieldType::Integer { min: 1 }).default_value(json!(32)),
            FieldSpec::new("y_bins", FieldType::Integer { min: 1 }).default_value(json!(32)),
        ],
        "barplot" => vec![
            column_field("value_column", NUMERIC).required(),
            column_field("group_by", &[ColumnKind::Categorical])
                .describe("defaults to the active cluster column"),
            FieldSpec::new(
                "aggregate",
                FieldType::Choice {
                    options: vec!["mean".into(), "count".into(), "sum".into()],
                },
            )
            .default_value(json!("mean")),
        ],
        "table" => vec![
            FieldSpec::new("page_size", FieldType::Integer { min: 1 }).default_value(json!(25)),
            column_field("sort_column", ANY),
            FieldSpec::new("page", FieldType::Integer { min: 0 }).default_value(json!(0)),
        ],
        "smiles" => vec![
            column_field("smiles_column", LABELS).required(),
            FieldSpec::new(
                "mode",
                FieldType::Choice {
                    options: vec!["hover-follow".into(), "pinned".into()],
                },
            )
            .default_value(json!("hover-follow")),
            FieldSpec::new("pinned_row", FieldType::RowId).describe("required in pinned mode"),
        ],
        _ => return None,
    };
    Some(ConfigSchema {
        kind: kind.to_string(),
        fields,
    })
}

impl ConfigSchema {
    /// Checks settings (without `kind`) against this schema and the table.
    pub fn validate(&self, settings: &Map<String, Value>, table: &Table) -> Result<(), PlotError> {
        for key in settings.keys() {
            if !self.fields.iter().any(|f| &f.name == key) {
                return Err(PlotError::InvalidSetting {
                    field: key.clone(),
                    reason: "unknown setting".into(),
                });
            }
        }
        for field in &self.fields {
            let value = match settings.get(&field.name) {
                None | Some(Value::Null) if field.required => {
                    return Err(PlotError::InvalidSetting {
                        field: field.name.clone(),
                        reason: "required".into(),
                    })
                }
                None | Some(Value::Null) => continue,
                Some(v) => v,
            };
            let bad = |reason: &str| PlotError::InvalidSetting {
                field: field.name.clone(),
                reason: reason.to_string(),
            };
            match &field.field_type {
                FieldType::Column { kinds } => {
                    let name = value.as_str().ok_or_else(|| bad("expected a column name"))?;
                    let column = table
                        .column(name)
                        .ok_or_else(|| PlotError::UnknownColumn(name.to_string()))?;
                    if !kinds.contains(&column.kind()) {
                        return Err(PlotError::KindMismatch {
                            column: name.to_string(),
                            found: column.kind(),
                        });
                    }
                }
                FieldType::Integer { min } => {
                    let v = value.as_i64().ok_or_else(|| bad("expected an integer"))?;
                    if v < *min {
                        return Err(bad(&format!("must be at least {min}")));
                    }
                }
                FieldType::Boolean => {
                    value.as_bool().ok_or_else(|| bad("expected a boolean"))?;
                }
                FieldType::Choice { options } => {
                    let v = value.as_str().ok_or_else(|| bad("expected a string"))?;
                    if !options.iter().any(|o| o == v) {
                        return Err(bad(&format!("expected one of {}", options.join(", "))));
                    }
                }
                FieldType::RowId => {
                    let id = value.as_u64().ok_or_else(|| bad("expected a row id"))?;
                    if table.row_index(RowId(id)).is_none() {
                        return Err(PlotError::UnknownRow(RowId(id)));
                    }
                }
                FieldType::String => {
                    value.as_str().ok_or_else(|| bad("expected a string"))?;
                }
            }
        }
        Ok(())
    }
}

/// Validates plot configurations of every kind a host knows about.
pub trait ConfigValidator {
    fn validate(&self, config: &PlotConfig, table: &Table) -> Result<(), PlotError>;
}

/// Validator that knows only the built-in kinds.
#[derive(Debug, Clone, Copy, Default)]
pub struct Builtins;

impl ConfigValidator for Builtins {
    fn validate(&self, config: &PlotConfig, table: &Table) -> Result<(), PlotError> {
        validate_builtin(config, table)
    }
}

pub fn validate_builtin(config: &PlotConfig, table: &Table) -> Result<(), PlotError> {
    let schema = builtin_schema(config.kind()).ok_or_else(|| PlotError::UnknownKind(config.kind().to_string()))?;
    schema.validate(&config.settings(), table)?;
    if let PlotConfig::Smiles(c) = config {
        if c.mode == SmilesMode::Pinned && c.pinned_row.is_none() {
            return Err(PlotError::InvalidSetting {
                field: "pinned_row".into(),
                reason: "required in pinned mode".into(),
            });
        }
    }
    Ok(())
}
