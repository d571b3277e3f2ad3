//! SMILES parsing, 2D coordinate generation and stick-structure SVG.
//!
//! Supported: organic-subset and bracket atoms, explicit bonds `- = # :`,
//! branches, ring closures `1`-`9` and `%nn`. Stereochemistry, wildcards and
//! multi-component strings are rejected as unsupported.

mod depict;
mod element;
mod layout;
mod parser;
mod rings;

use serde::Serialize;
use thiserror::Error;

pub use self::depict::{depict_svg, DepictError, DepictStyle};
pub use self::element::Element;
pub use self::layout::{layout2d, Layout2D, RELAX_ITERATIONS, RELAX_STEP};
pub use self::parser::parse_smiles;
pub use self::rings::smallest_rings;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("empty SMILES string")]
    Empty,
    #[error("unmatched parenthesis at {position}")]
    UnmatchedParenthesis { position: usize },
    #[error("ring bond {ring} opened at {position} is never closed")]
    UnclosedRingBond { ring: u16, position: usize },
    #[error("ring bond {ring} at {position} duplicates an existing bond")]
    DuplicateRingBond { ring: u16, position: usize },
    #[error("invalid token at {position}")]
    InvalidToken { position: usize },
    #[error("unsupported feature `{feature}` at {position}")]
    UnsupportedFeature { position: usize, feature: char },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Bond order in half units (aromatic = 3).
    pub fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    /// Integer order with aromatic bonds counted as 1.
    pub fn integral(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Atom {
    pub index: usize,
    pub element: Element,
    pub aromatic: bool,
    pub formal_charge: i32,
    pub isotope: Option<u32>,
    /// Hydrogen count written in a bracket atom; `Some` exactly for bracket atoms.
    pub explicit_h: Option<u32>,
    /// Hydrogens inferred from the valence model; always 0 for bracket atoms.
    pub implicit_h: u32,
}

impl Atom {
    pub fn total_h(&self) -> u32 {
        self.implicit_h + self.explicit_h.unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }

    pub fn touches(&self, atom: usize) -> bool {
        self.a == atom || self.b == atom
    }
}

/// Connected molecular graph parsed from one SMILES string.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MolGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    pub source: String,
}

impl MolGraph {
    /// Neighbour lists in bond order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for b in &self.bonds {
            adj[b.a].push(b.b);
            adj[b.b].push(b.a);
        }
        adj
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.bonds
            .iter()
            .find(|bond| (bond.a == a && bond.b == b) || (bond.a == b && bond.b == a))
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != Element::H).count()
    }
}
