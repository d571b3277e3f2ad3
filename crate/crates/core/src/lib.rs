//! Core of a linked-view exploration engine for tabular data.

pub mod analytics;
pub mod engine;
pub mod matrix;
pub mod plots;
pub mod session;
pub mod smiles;
pub mod table;
