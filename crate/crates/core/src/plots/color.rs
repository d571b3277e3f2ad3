use serde::Serialize;

/// Ten categorical colours; cluster `i` uses `PALETTE[i % 10]`.
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

pub const PALETTE_WRAP_WARNING: &str = "palette_wrapped";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColorAssignment {
    pub labels: Vec<String>,
    pub indices: Vec<usize>,
    /// More labels than palette entries; some colours repeat.
    pub wrapped: bool,
}

impl ColorAssignment {
    /// Assigns palette slots in label order. Labels are expected distinct.
    pub fn new(labels: Vec<String>) -> Self {
        let indices = (0..labels.len()).map(|i| i % PALETTE.len()).collect();
        let wrapped = labels.len() > PALETTE.len();
        Self {
            labels,
            indices,
            wrapped,
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label).map(|i| self.indices[i])
    }
}
