//! SMILES → molecular graph.
//!
//! Supported: the organic subset and bracket atoms (isotope, charge,
//! explicit H, chirality markers), bonds `- = # :` plus the directional
//! `/ \` (parsed, treated as single — stereochemistry carries no graph
//! semantics here), branches, single-digit and `%nn` ring closures, aromatic
//! lowercase atoms, and `.`-separated components.

use std::collections::HashMap;

use crate::elements;
use crate::error::SmilesError;
use crate::graph::{is_organic_subset, Atom, Bond, BondOrder, MolGraph};
use crate::valence;

/// Parses a SMILES string, assigns implicit hydrogens, and attempts a
/// Kekulé assignment for aromatic systems.
pub fn parse(text: &str) -> Result<MolGraph, SmilesError> {
    let mut p = Parser::new(text);
    p.run()?;
    let mut graph = MolGraph {
        atoms: p.atoms,
        bonds: p.bonds,
        source: text.to_string(),
        implicit_h: Vec::new(),
        kekule: None,
    };
    valence::demote_acyclic_aromatic_bonds(&mut graph);
    graph.kekule = valence::kekulize(&graph);
    graph.implicit_h = valence::assign_implicit_h(&graph);
    Ok(graph)
}

struct PendingBond {
    order: Option<BondOrder>,
    pos: usize,
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    prev: Option<usize>,
    pending: Option<PendingBond>,
    branch_stack: Vec<usize>,
    ring_open: HashMap<u16, (usize, Option<BondOrder>, usize)>,
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            atoms: Vec::new(),
            bonds: Vec::new(),
            prev: None,
            pending: None,
            branch_stack: Vec::new(),
            ring_open: HashMap::new(),
        }
    }

    fn err(&self, msg: impl Into<String>) -> SmilesError {
        SmilesError::parse(self.pos, msg)
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        if self.chars.is_empty() {
            return Err(self.err("empty SMILES"));
        }
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            match c {
                '[' => {
                    let atom = self.parse_bracket_atom()?;
                    self.push_atom(atom)?;
                }
                'C' if self.peek(1) == Some('l') => {
                    self.pos += 2;
                    self.push_atom(plain_atom("Cl", false))?;
                }
                'B' if self.peek(1) == Some('r') => {
                    self.pos += 2;
                    self.push_atom(plain_atom("Br", false))?;
                }
                'B' | 'C' | 'N' | 'O' | 'P' | 'S' | 'F' | 'I' => {
                    self.pos += 1;
                    self.push_atom(plain_atom(&c.to_string(), false))?;
                }
                'b' | 'c' | 'n' | 'o' | 'p' | 's' => {
                    self.pos += 1;
                    self.push_atom(plain_atom(&c.to_uppercase().to_string(), true))?;
                }
                '-' | '=' | '#' | ':' | '/' | '\\' => {
                    if self.pending.is_some() {
                        return Err(self.err("two bond symbols in a row"));
                    }
                    let order = match c {
                        '=' => BondOrder::Double,
                        '#' => BondOrder::Triple,
                        ':' => BondOrder::Aromatic,
                        // '-', '/', '\\': single; stereo direction ignored.
                        _ => BondOrder::Single,
                    };
                    self.pending = Some(PendingBond {
                        order: Some(order),
                        pos: self.pos,
                    });
                    self.pos += 1;
                }
                '(' => {
                    let Some(prev) = self.prev else {
                        return Err(self.err("branch opened before any atom"));
                    };
                    if self.pending.is_some() {
                        return Err(self.err("bond symbol before '('"));
                    }
                    self.branch_stack.push(prev);
                    self.pos += 1;
                }
                ')' => {
                    if self.pending.is_some() {
                        return Err(self.err("dangling bond before ')'"));
                    }
                    let Some(prev) = self.branch_stack.pop() else {
                        return Err(self.err("unbalanced ')'"));
                    };
                    self.prev = Some(prev);
                    self.pos += 1;
                }
                '0'..='9' => {
                    self.pos += 1;
                    self.close_or_open_ring(c.to_digit(10).unwrap() as u16)?;
                }
                '%' => {
                    let d1 = self.peek(1).and_then(|c| c.to_digit(10));
                    let d2 = self.peek(2).and_then(|c| c.to_digit(10));
                    let (Some(d1), Some(d2)) = (d1, d2) else {
                        return Err(self.err("'%' must be followed by two digits"));
                    };
                    self.pos += 3;
                    self.close_or_open_ring((d1 * 10 + d2) as u16)?;
                }
                '.' => {
                    if self.pending.is_some() {
                        return Err(self.err("bond symbol before '.'"));
                    }
                    if self.prev.is_none() {
                        return Err(self.err("'.' before any atom"));
                    }
                    // Next atom starts a new component.
                    self.prev = None;
                    self.pos += 1;
                }
                other => {
                    return Err(self.err(format!("unexpected character '{other}'")));
                }
            }
        }
        if self.pending.is_some() {
            return Err(self.err("dangling bond at end of input"));
        }
        if !self.branch_stack.is_empty() {
            return Err(self.err("unbalanced '(': branch never closed"));
        }
        if let Some((&digit, &(_, _,
            pos))) = self.ring_open.iter().next() {
            return Err(SmilesError::parse(
                pos,
                format!("unmatched ring closure {digit}"),
            ));
        }
        if self.atoms.is_empty() {
            return Err(self.err("no atoms"));
        }
        Ok(())
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn push_atom(&mut self, atom: Atom) -> Result<(), SmilesError> {
        let idx = self.atoms.len();
        let aromatic_new = atom.aromatic;
        self.atoms.push(atom);
        if let Some(prev) = self.prev {
            let order = match self.pending.take() {
                Some(p) => p.order.unwrap(),
                None => {
                    if aromatic_new && self.atoms[prev].aromatic {
                        BondOrder::Aromatic
                    } else {
                        BondOrder::Single
                    }
                }
            };
            self.add_bond(prev, idx, order)?;
        } else if let Some(p) = self.pending.take() {
            return Err(SmilesError::parse(p.pos, "bond with no preceding atom"));
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<(), SmilesError> {
        if a == b {
            return Err(self.err("bond from an atom to itself"));
        }
        if self
            .bonds
            .iter()
            .any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
        {
            return Err(self.err("duplicate bond between the same atoms"));
        }
        self.bonds.push(Bond { a, b, order });
        Ok(())
    }

    fn close_or_open_ring(&mut self, digit: u16) -> Result<(), SmilesError> {
        let Some(here) = self.prev else {
            return Err(self.err("ring closure before any atom"));
        };
        let pending_order = self.pending.take().map(|p| p.order.unwrap());
        match self.ring_open.remove(&digit) {
            None => {
                self.ring_open
                    .insert(digit, (here, pending_order, self.pos));
            }
            Some((other, open_order, _)) => {
                let order = match (open_order, pending_order) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(self.err("conflicting orders on ring closure"));
                    }
                    (Some(a), _) => a,
                    (None, Some(b)) => b,
                    (None, None) => {
                        if self.atoms[here].aromatic && self.atoms[other].aromatic {
                            BondOrder::Aromatic
                        } else {
                            BondOrder::Single
                        }
                    }
                };
                self.add_bond(other, here, order)?;
            }
        }
        Ok(())
    }

    fn parse_bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        let start = self.pos;
        debug_assert_eq!(self.chars[self.pos], '[');
        self.pos += 1;

        // Isotope digits.
        let mut isotope: Option<u16> = None;
        while let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
            let d = c.to_digit(10).unwrap() as u16;
            isotope = Some(isotope.unwrap_or(0) * 10 + d);
            self.pos += 1;
        }

        // Element symbol. 'H' alone is the hydrogen atom; a lowercase first
        // letter marks an aromatic atom.
        let first = self
            .peek(0)
            .ok_or_else(|| SmilesError::parse(start, "unterminated bracket atom"))?;
        if !first.is_ascii_alphabetic() {
            return Err(self.err(format!("expected element symbol, found '{first}'")));
        }
        self.pos += 1;
        let mut symbol = first.to_string();
        // A following lowercase letter extends the symbol when the pair
        // names a known element ([Cl-], [Se], [se]); 'H' never extends
        // ([CH4] is carbon plus hydrogens, not an undefined "CH" element).
        if let Some(second) = self.peek(0) {
            if second.is_ascii_lowercase() && second != 'h' {
                let candidate = canonical_case(&format!("{symbol}{second}"));
                if elements::is_known_element(&candidate) {
                    symbol.push(second);
                    self.pos += 1;
                }
            }
        }
        let aromatic = symbol.chars().next().unwrap().is_ascii_lowercase();
        let canonical = canonical_case(&symbol);
        if !elements::is_known_element(&canonical) {
            return Err(SmilesError::parse(start, format!("unknown element '{symbol}'")));
        }
        if aromatic && !elements::AROMATIC_CAPABLE.contains(&canonical.as_str()) {
            return Err(SmilesError::parse(
                start,
                format!("element '{canonical}' cannot be aromatic"),
            ));
        }

        // Chirality markers, parsed and ignored.
        while self.peek(0) == Some('@') {
            self.pos += 1;
        }

        // Explicit hydrogen count.
        let mut explicit_h: u8 = 0;
        if self.peek(0) == Some('H') {
            self.pos += 1;
            explicit_h = 1;
            if let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
                explicit_h = c.to_digit(10).unwrap() as u8;
                self.pos += 1;
            }
        }

        // Charge: '+'/'-' runs or a signed count.
        let mut charge: i8 = 0;
        if let Some(sign @ ('+' | '-')) = self.peek(0) {
            let unit: i8 = if sign == '+' { 1 } else { -1 };
            self.pos += 1;
            charge = unit;
            if let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
                charge = unit * c.to_digit(10).unwrap() as i8;
                self.pos += 1;
            } else {
                while self.peek(0) == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
            }
        }

        // Atom class, parsed and ignored.
        if self.peek(0) == Some(':') {
            self.pos += 1;
            let mut any = false;
            while self.peek(0).filter(char::is_ascii_digit).is_some() {
                self.pos += 1;
                any = true;
            }
            if !any {
                return Err(self.err("':' in bracket requires a class number"));
            }
        }

        if self.peek(0) != Some(']') {
            let found = self.peek(0).map(|c| c.to_string()).unwrap_or("end".into());
            return Err(self.err(format!("expected ']', found {found}")));
        }
        self.pos += 1;

        Ok(Atom {
            element: canonical,
            aromatic,
            charge,
            explicit_h,
            bracket: true,
            isotope,
        })
    }
}

fn plain_atom(symbol: &str, aromatic: bool) -> Atom {
    debug_assert!(is_organic_subset(symbol));
    Atom {
        element: symbol.to_string(),
        aromatic,
        charge: 0,
        explicit_h: 0,
        bracket: false,
        isotope: None,
    }
}

/// "cl" → "Cl", "se" → "Se", "C" → "C".
fn canonical_case(symbol: &str) -> String {
    let mut out = String::with_capacity(symbol.len());
    for (i, c) in symbol.chars().enumerate() {
        if i == 0 {
            out.extend(c.to_uppercase());
        } else {
            out.extend(c.to_lowercase());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ethanol_atoms_bonds_and_hydrogens() {
        let g = parse("CCO").unwrap();
        assert_eq!(g.atoms.len(), 3);
        assert_eq!(g.bonds.len(), 2);
        assert!(g.bonds.iter().all(|b| b.order == BondOrder::Single));
        assert_eq!(g.implicit_h, vec![3, 2, 1]);
    }

    #[test]
    fn unmatched_ring_closure_is_an_error() {
        assert!(matches!(parse("C1CC"), Err(SmilesError::Parse { .. })));
    }

    #[test]
    fn benzene_is_six_aromatic_atoms_and_bonds() {
        let g = parse("c1ccccc1").unwrap();
        assert_eq!(g.atoms.len(), 6);
        assert_eq!(g.bonds.len(), 6);
        assert!(g.atoms.iter().all(|a| a.aromatic));
        assert!(g.bonds.iter().all(|b| b.order == BondOrder::Aromatic));
        assert_eq!(g.ring_count(), 1);
        assert_eq!(g.implicit_h, vec![1; 6]);
    }

    #[test]
    fn branches_and_double_bonds() {
        let g = parse("CC(=O)O").unwrap();
        assert_eq!(g.atoms.len(), 4);
        assert_eq!(g.bonds.len(), 3);
        assert_eq!(g.bonds[1].order, BondOrder::Double);
        // Carboxylic acid: CH3, C, =O, OH
        assert_eq!(g.implicit_h, vec![3, 0, 0, 1]);
    }

    #[test]
    fn bracket_atom_fields() {
        let g = parse("[13CH3+]").unwrap();
        let a = &g.atoms[0];
        assert_eq!(a.element, "C");
        assert_eq!(a.isotope, Some(13));
        assert_eq!(a.explicit_h, 3);
        assert_eq!(a.charge, 1);
        assert!(a.bracket);
        assert_eq!(g.implicit_h[0], 0);
    }

    #[test]
    fn charge_runs_and_counts() {
        assert_eq!(parse("[Fe+2]").unwrap().atoms[0].charge, 2);
        assert_eq!(parse("[Fe++]").unwrap().atoms[0].charge, 2);
        assert_eq!(parse("[O-]").unwrap().atoms[0].charge, -1);
    }

    #[test]
    fn percent_ring_closures() {
        let g = parse("C%10CCCCCCCC%10").unwrap();
        assert_eq!(g.ring_count(), 1);
        assert_eq!(g.atoms.len(), 9);
    }

    #[test]
    fn dot_separates_components() {
        let g = parse("[Na+].[Cl-]").unwrap();
        assert_eq!(g.atoms.len(), 2);
        assert_eq!(g.bonds.len(), 0);
        assert_eq!(g.components(), 2);
    }

    #[test]
    fn pyrrole_nitrogen_keeps_its_bracket_hydrogen() {
        let g = parse("c1cc[nH]c1").unwrap();
        let n = g.atoms.iter().position(|a| a.element == "N").unwrap();
        assert_eq!(g.hydrogens(n), 1);
        assert!(g.kekule.is_some());
    }

    #[test]
    fn stereo_markers_are_ignored() {
        let g = parse("C[C@H](N)C(=O)O").unwrap();
        assert_eq!(g.atoms.len(), 6);
        let g2 = parse("F/C=C/F").unwrap();
        assert_eq!(g2.bonds.iter().filter(|b| b.order == BondOrder::Double).count(), 1);
    }

    #[test]
    fn syntax_errors() {
        for bad in [
            "", "C(", "C)", "C(C", "=C", "C=", "[C", "[]", "[Xx]", "C11", "C12C12C",
            "C%1C", "1CC", ".C", "C..C", "X",
        ] {
            assert!(parse(bad).is_err(), "expected parse error for {bad:?}");
        }
    }

    #[test]
    fn duplicate_bond_rejected() {
        // Ring digits 1 and 2 both close between the same two atoms.
        assert!(parse("C12CC12").is_err());
    }

    #[test]
    fn naphthalene_fusion() {
        let g = parse("c1ccc2ccccc2c1").unwrap();
        assert_eq!(g.atoms.len(), 10);
        assert_eq!(g.ring_count(), 2);
        assert!(g.kekule.is_some());
        // Fusion carbons carry no hydrogens.
        let h_total: u32 = (0..10).map(|i| g.hydrogens(i) as u32).sum();
        assert_eq!(h_total, 8);
    }
}
