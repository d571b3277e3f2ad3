use std::fmt;

use serde::{Serialize, Serializer};

/// Chemical element, stored as its atomic number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(u8);

const SYMBOLS: [&str; 54] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe",
];

// Heavier elements that still show up in small-molecule data.
const EXTRA: [(&str, u8); 6] = [
    ("Cs", 55),
    ("Ba", 56),
    ("Pt", 78),
    ("Au", 79),
    ("Hg", 80),
    ("Pb", 82),
];

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        if let Some(i) = SYMBOLS.iter().position(|s| *s == symbol) {
            return Some(Element(i as u8 + 1));
        }
        EXTRA
            .iter()
            .find(|(s, _)| *s == symbol)
            .map(|(_, z)| Element(*z))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        let z = self.0 as usize;
        if (1..=SYMBOLS.len()).contains(&z) {
            return SYMBOLS[z - 1];
        }
        EXTRA
            .iter()
            .find(|(_, n)| *n == self.0)
            .map(|(s, _)| *s)
            .expect("element constructed from a known symbol")
    }

    /// Lowest standard valence for organic-subset elements.
    pub fn default_valence(self) -> Option<u32> {
        match self {
            Element::B => Some(3),
            Element::C => Some(4),
            Element::N => Some(3),
            Element::O => Some(2),
            Element::P => Some(3),
            Element::S => Some(2),
            Element::F | Element::CL | Element::BR | Element::I => Some(1),
            _ => None,
        }
    }

    /// Elements allowed to be written in aromatic (lowercase) form.
    pub fn can_be_aromatic(self) -> bool {
        matches!(
            self,
            Element::B | Element::C | Element::N | Element::O | Element::P | Element::S
        )
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_round_trip() {
        for s in ["H", "C", "Cl", "Br", "Xe", "Pt", "Na"] {
            assert_eq!(Element::from_symbol(s).unwrap().symbol(), s);
        }
        assert_eq!(Element::from_symbol("Cl"), Some(Element::CL));
        assert!(Element::from_symbol("Xx").is_none());
        assert!(Element::from_symbol("c").is_none());
    }
}
