use std::collections::BTreeMap;

use super::{Atom, Bond, BondOrder, Element, MolGraph, SmilesError};

const MAX_CHARGE: i32 = 15;
const MAX_HCOUNT: u32 = 99;

/// Parses a single-component SMILES string. Positions in errors are byte
/// offsets into `s`.
pub fn parse_smiles(s: &str) -> Result<MolGraph, SmilesError> {
    Parser::new(s).run()
}

struct OpenRing {
    atom: usize,
    bond: Option<BondOrder>,
    position: usize,
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    rings: BTreeMap<u16, OpenRing>,
    branches: Vec<(usize, usize)>,
    prev: Option<usize>,
    pending: Option<BondOrder>,
    // Set right after `(` until the branch's first atom or bond.
    branch_start: bool,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            atoms: Vec::new(),
            bonds: Vec::new(),
            rings: BTreeMap::new(),
            branches: Vec::new(),
            prev: None,
            pending: None,
            branch_start: false,
        }
    }

    fn invalid(&self, position: usize) -> SmilesError {
        SmilesError::InvalidToken { position }
    }

    fn run(mut self) -> Result<MolGraph, SmilesError> {
        if self.bytes.is_empty() {
            return Err(SmilesError::Empty);
        }
        while self.pos < self.bytes.len() {
            let at = self.pos;
            let c = self.bytes[at];
            match c {
                b'(' => {
                    if self.prev.is_none() || self.pending.is_some() || self.branch_start {
                        return Err(self.invalid(at));
                    }
                    self.branches.push((self.prev.unwrap(), at));
                    self.branch_start = true;
                    self.pos += 1;
                }
                b')' => {
                    let Some((atom, _)) = self.branches.pop() else {
                        return Err(SmilesError::UnmatchedParenthesis { position: at });
                    };
                    if self.pending.is_some() || self.branch_start {
                        return Err(self.invalid(at));
                    }
                    self.prev = Some(atom);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' => {
                    if self.prev.is_none() || self.pending.is_some() {
                        return Err(self.invalid(at));
                    }
                    self.pending = Some(match c {
                        b'-' => BondOrder::Single,
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        _ => BondOrder::Aromatic,
                    });
                    self.branch_start = false;
                    self.pos += 1;
                }
                b'.' | b'/' | b'\\' | b'*' | b'@' => {
                    return Err(SmilesError::UnsupportedFeature {
                        position: at,
                        feature: c as char,
                    });
                }
                b'0'..=b'9' | b'%' => self.ring_bond()?,
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom);
                }
                _ => {
                    let atom = self.organic_atom().ok_or_else(|| self.invalid(at))?;
                    self.add_atom(atom);
                }
            }
        }

        if let Some(&(_, position)) = self.branches.last() {
            return Err(SmilesError::UnmatchedParenthesis { position });
        }
        if self.pending.is_some() || self.branch_start {
            return Err(self.invalid(self.bytes.len()));
        }
        if let Some((ring, open)) = self.rings.iter().min_by_key(|(_, o)| o.position) {
            return Err(SmilesError::UnclosedRingBond {
                ring: *ring,
                position: open.position,
            });
        }

        let mut halves = vec![0u32; self.atoms.len()];
        for b in &self.bonds {
            halves[b.a] += b.order.half_units();
            halves[b.b] += b.order.half_units();
        }
        for (atom, used) in self.atoms.iter_mut().zip(halves) {
            if atom.explicit_h.is_some() {
                continue;
            }
            let valence = atom
                .element
                .default_valence()
                .expect("organic subset atoms have a default valence");
            atom.implicit_h = (2 * valence).saturating_sub(used) / 2;
        }

        Ok(MolGraph {
            atoms: self.atoms,
            bonds: self.bonds,
            source: self.src.to_owned(),
        })
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn add_atom(&mut self, mut atom: Atom) {
        let index = self.atoms.len();
        atom.index = index;
        self.atoms.push(atom);
        if let Some(prev) = self.prev {
            let order = self
                .pending
                .take()
                .unwrap_or_else(|| self.default_order(prev, index));
            self.bonds.push(Bond {
                a: prev,
                b: index,
                order,
            });
        }
        self.prev = Some(index);
        self.branch_start = false;
    }

    fn ring_bond(&mut self) -> Result<(), SmilesError> {
        let at = self.pos;
        let Some(atom) = self.prev else {
            return Err(self.invalid(at));
        };
        if self.branch_start {
            return Err(self.invalid(at));
        }
        let ring = if self.bytes[at] == b'%' {
            let digits = self.bytes.get(at + 1..at + 3).ok_or_else(|| self.invalid(at))?;
            if !digits.iter().all(u8::is_ascii_digit) {
                return Err(self.invalid(at));
            }
            self.pos += 3;
            u16::from(digits[0] - b'0') * 10 + u16::from(digits[1] - b'0')
        } else {
            self.pos += 1;
            u16::from(self.bytes[at] - b'0')
        };
        let written = self.pending.take();

        match self.rings.remove(&ring) {
            Some(open) => {
                if open.atom == atom {
                    return Err(SmilesError::DuplicateRingBond { ring, position: at });
                }
                let order = match (open.bond, written) {
                    (Some(x), Some(y)) if x != y => return Err(self.invalid(at)),
                    (Some(x), _) | (None, Some(x)) => x,
                    (None, None) => self.default_order(open.atom, atom),
                };
                let exists = self
                    .bonds
                    .iter()
                    .any(|b| b.touches(open.atom) && b.touches(atom));
                if exists {
                    return Err(SmilesError::DuplicateRingBond { ring, position: at });
                }
                self.bonds.push(Bond {
                    a: open.atom,
                    b: atom,
                    order,
                });
            }
            None => {
                self.rings.insert(
                    ring,
                    OpenRing {
                        atom,
                        bond: written,
                        position: at,
                    },
                );
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Option<Atom> {
        let c = self.bytes[self.pos];
        let next = self.bytes.get(self.pos + 1).copied();
        let (element, aromatic, len) = match c {
            b'B' if next == Some(b'r') => (Element::BR, false, 2),
            b'C' if next == Some(b'l') => (Element::CL, false, 2),
            b'B' => (Element::B, false, 1),
            b'C' => (Element::C, false, 1),
            b'N' => (Element::N, false, 1),
            b'O' => (Element::O, false, 1),
            b'P' => (Element::P, false, 1),
            b'S' => (Element::S, false, 1),
            b'F' => (Element::F, false, 1),
            b'I' => (Element::I, false, 1),
            b'b' => (Element::B, true, 1),
            b'c' => (Element::C, true, 1),
            b'n' => (Element::N, true, 1),
            b'o' => (Element::O, true, 1),
            b'p' => (Element::P, true, 1),
            b's' => (Element::S, true, 1),
            _ => return None,
        };
        self.pos += len;
        Some(Atom {
            index: 0,
            element,
            aromatic,
            formal_charge: 0,
            isotope: None,
            explicit_h: None,
            implicit_h: 0,
        })
    }

    fn read_number(&mut self, limit: u32) -> Result<Option<u32>, SmilesError> {
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(d) = self.bytes.get(self.pos).filter(|b| b.is_ascii_digit()) {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u32::from(d - b'0')))
                .filter(|v| *v <= limit)
                .ok_or_else(|| self.invalid(start))?;
            self.pos += 1;
        }
        Ok((self.pos > start).then_some(value))
    }

    fn bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        self.pos += 1;
        let isotope_at = self.pos;
        let isotope = self.read_number(999)?;
        if isotope == Some(0) {
            return Err(self.invalid(isotope_at));
        }

        let sym_at = self.pos;
        let c = *self.bytes.get(sym_at).ok_or_else(|| self.invalid(sym_at))?;
        let next = self.bytes.get(sym_at + 1).copied();
        let (element, aromatic) = match c {
            b'*' => {
                return Err(SmilesError::UnsupportedFeature {
                    position: sym_at,
                    feature: '*',
                })
            }
            b'a'..=b'z' => {
                if next.is_some_and(|n| n.is_ascii_lowercase()) {
                    return Err(self.invalid(sym_at));
                }
                let upper = (c.to_ascii_uppercase() as char).to_string();
                let element = Element::from_symbol(&upper)
                    .filter(|e| e.can_be_aromatic())
                    .ok_or_else(|| self.invalid(sym_at))?;
                self.pos += 1;
                (element, true)
            }
            b'A'..=b'Z' => {
                let two = next
                    .filter(u8::is_ascii_lowercase)
                    .and_then(|n| Element::from_symbol(&format!("{}{}", c as char, n as char)));
                match two {
                    Some(e) => {
                        self.pos += 2;
                        (e, false)
                    }
                    None => {
                        let e = Element::from_symbol(&(c as char).to_string())
                            .ok_or_else(|| self.invalid(sym_at))?;
                        self.pos += 1;
                        (e, false)
                    }
                }
            }
            _ => return Err(self.invalid(sym_at)),
        };

        let mut hcount = None;
        let mut charge = None;
        loop {
            let at = self.pos;
            match self.bytes.get(at) {
                Some(b'@') => {
                    return Err(SmilesError::UnsupportedFeature {
                        position: at,
                        feature: '@',
                    })
                }
                Some(b'H') if hcount.is_none() => {
                    self.pos += 1;
                    hcount = Some(self.read_number(MAX_HCOUNT)?.unwrap_or(1));
                }
                Some(&sign @ (b'+' | b'-')) if charge.is_none() => {
                    self.pos += 1;
                    let unit = if sign == b'+' { 1 } else { -1 };
                    let magnitude = match self.read_number(MAX_CHARGE as u32)? {
                        Some(0) => return Err(self.invalid(at)),
                        Some(m) => m as i32,
                        None => {
                            let mut m = 1;
                            while self.bytes.get(self.pos) == Some(&sign) {
                                m += 1;
                                self.pos += 1;
                            }
                            if m > MAX_CHARGE {
                                return Err(self.invalid(at));
                            }
                            m
                        }
                    };
                    charge = Some(unit * magnitude);
                }
                Some(b':') => {
                    return Err(SmilesError::UnsupportedFeature {
                        position: at,
                        feature: ':',
                    })
                }
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.invalid(at)),
            }
        }

        Ok(Atom {
            index: 0,
            element,
            aromatic,
            formal_charge: charge.unwrap_or(0),
            isotope,
            explicit_h: Some(hcount.unwrap_or(0)),
            implicit_h: 0,
        })
    }
}
