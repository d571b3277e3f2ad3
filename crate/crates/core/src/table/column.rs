use serde::{Deserialize, Serialize};

/// Storage class of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Text,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Text => "text",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    /// Finite values or missing.
    Numeric(Vec<Option<f64>>),
    /// Codes index into `categories`, which holds each label once.
    Categorical {
        categories: Vec<String>,
        codes: Vec<Option<u32>>,
    },
    Text(Vec<Option<String>>),
}

/// Borrowed view of a single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Missing,
    Number(f64),
    Label(&'a str),
}

impl Cell<'_> {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Label(s) => Some(s),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Missing => serde_json::Value::Null,
            Cell::Number(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Cell::Label(s) => serde_json::Value::String((*s).to_owned()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    name: String,
    data: ColumnData,
}

impl Column {
    /// Numeric column; NaN and infinities become missing.
    pub fn numeric(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        let values = values
            .into_iter()
            .map(|v| v.filter(|x| x.is_finite()))
            .collect();
        Self {
            name: name.into(),
            data: ColumnData::Numeric(values),
        }
    }

    /// Categorical column whose dictionary is built in first-appearance order.
    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, labels: &[Option<S>]) -> Self {
        let mut categories: Vec<String> = Vec::new();
        let mut codes = Vec::with_capacity(labels.len());
        for label in labels {
            codes.push(label.as_ref().map(|l| {
                let l = l.as_ref();
                match categories.iter().position(|c| c == l) {
                    Some(i) => i as u32,
                    None => {
                        categories.push(l.to_owned());
                        (categories.len() - 1) as u32
                    }
                }
            }));
        }
        Self {
            name: name.into(),
            data: ColumnData::Categorical { categories, codes },
        }
    }

    /// Categorical column with an explicit dictionary. Returns `None` when a
    /// code is out of range or the dictionary repeats a label.
    pub fn categorical_with_dictionary(
        name: impl Into<String>,
        categories: Vec<String>,
        codes: Vec<Option<u32>>,
    ) -> Option<Self> {
        for (i, c) in categories.iter().enumerate() {
            if categories[..i].contains(c) {
                return None;
            }
        }
        if codes
            .iter()
            .flatten()
            .any(|&c| c as usize >= categories.len())
        {
            return None;
        }
        Some(Self {
            name: name.into(),
            data: ColumnData::Categorical { categories, codes },
        })
    }

    pub fn text(name: impl Into<String>, values: Vec<Option<String>>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::Text(values),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub(crate) fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn kind(&self) -> ColumnKind {
        match self.data {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical { .. } => ColumnKind::Categorical,
            ColumnData::Text(_) => ColumnKind::Text,
        }
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
            ColumnData::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self, row: usize) -> Cell<'_> {
        match &self.data {
            ColumnData::Numeric(v) => v[row].map_or(Cell::Missing, Cell::Number),
            ColumnData::Categorical { categories, codes } => codes[row]
                .map_or(Cell::Missing, |c| Cell::Label(&categories[c as usize])),
            ColumnData::Text(v) => v[row].as_deref().map_or(Cell::Missing, Cell::Label),
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell<'_>> + '_ {
        (0..self.len()).map(|i| self.cell(i))
    }

    pub fn numbers(&self) -> Option<&[Option<f64>]> {
        match &self.data {
            ColumnData::Numeric(v) => Some(v),
            _ => None,
        }
    }

    /// Dictionary of a categorical column.
    pub fn categories(&self) -> Option<&[String]> {
        match &self.data {
            ColumnData::Categorical { categories, .. } => Some(categories),
            _ => None,
        }
    }

    /// Cell values as owned labels; numbers are formatted with `{}`.
    pub fn labels(&self) -> Vec<Option<String>> {
        self.cells()
            .map(|c| match c {
                Cell::Missing => None,
                Cell::Number(v) => Some(format!("{v}")),
                Cell::Label(s) => Some(s.to_owned()),
            })
            .collect()
    }
}
