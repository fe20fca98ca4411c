//! Built-in molecular descriptors.

use crate::elements::atomic_weight;
use crate::graph::MolGraph;

/// Molecular weight in g/mol: standard atomic weights over all atoms,
/// implicit and explicit hydrogens included.
pub fn molecular_weight(g: &MolGraph) -> f64 {
    let h = atomic_weight("H").unwrap();
    let mut total = 0.0;
    for (i, a) in g.atoms.iter().enumerate() {
        total += atomic_weight(&a.element).unwrap_or(0.0);
        total += g.hydrogens(i) as f64 * h;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptors {
    /// Molecular weight divided by 100, the scaling the conditioning
    /// pipeline trains on.
    pub mol_weight_scaled: f64,
    pub heavy_atom_count: usize,
    pub ring_count: usize,
}

pub fn descriptors(g: &MolGraph) -> Descriptors {
    Descriptors {
        mol_weight_scaled: molecular_weight(g) / 100.0,
        heavy_atom_count: g.heavy_atom_count(),
        ring_count: g.ring_count(),
    }
}

/// Column names for the built-in descriptors, in canonical order.
pub const BUILTIN_COLUMNS: [&str; 3] = ["mol_weight_scaled", "heavy_atom_count", "ring_count"];

pub fn descriptor_by_name(d: &Descriptors, name: &str) -> Option<f64> {
    match name {
        "mol_weight_scaled" => Some(d.mol_weight_scaled),
        "heavy_atom_count" => Some(d.heavy_atom_count as f64),
        "ring_count" => Some(d.ring_count as f64),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn ethanol_weight() {
        let g = parse("CCO").unwrap();
        assert!((molecular_weight(&g) - 46.069).abs() < 0.01);
        let d = descriptors(&g);
        assert!((d.mol_weight_scaled - 0.46069).abs() < 1e-4);
        assert_eq!(d.heavy_atom_count, 3);
        assert_eq!(d.ring_count, 0);
    }

    #[test]
    fn molecular_hydrogen_weight() {
        let g = parse("[H][H]").unwrap();
        assert!((molecular_weight(&g) - 2.016).abs() < 0.001);
        assert_eq!(g.heavy_atom_count(), 0);
    }

    #[test]
    fn methane_weight() {
        let g = parse("C").unwrap();
        assert!((molecular_weight(&g) - 16.043).abs() < 0.001);
    }

    #[test]
    fn ring_counts() {
        assert_eq!(parse("c1ccccc1").unwrap().ring_count(), 1);
        assert_eq!(parse("C1CC1C1CC1").unwrap().ring_count(), 2);
        assert_eq!(parse("CCO").unwrap().ring_count(), 0);
        assert_eq!(parse("c1ccc2ccccc2c1").unwrap().ring_count(), 2);
    }

    #[test]
    fn acyclic_iff_zero_rings() {
        for (s, cyclic) in [("CCCC", false), ("C1CCC1", true), ("[Na+].[Cl-]", false)] {
            let g = parse(s).unwrap();
            assert_eq!(g.ring_count() > 0, cyclic, "{s}");
        }
    }
}
