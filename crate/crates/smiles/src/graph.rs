//! The parsed molecular graph.

use crate::elements;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Order contribution to an atom's valence; aromatic counts 1.5 until a
    /// Kekulé assignment settles it.
    pub fn as_f64(self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    /// Canonical element symbol ("C", "Cl", "Se").
    pub element: String,
    pub aromatic: bool,
    pub charge: i8,
    /// Hydrogen count written inside a bracket; always 0 for organic-subset
    /// atoms, whose hydrogens are implicit.
    pub explicit_h: u8,
    pub bracket: bool,
    pub isotope: Option<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

/// A parsed molecule: atoms, bonds, assigned implicit hydrogens, and the
/// source text it came from.
#[derive(Debug, Clone)]
pub struct MolGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    pub source: String,
    /// Implicit hydrogen count per atom (0 for bracket atoms).
    pub implicit_h: Vec<u8>,
    /// Kekulé orders for `bonds`, when an assignment exists: aromatic bonds
    /// resolved to single/double, all others unchanged.
    pub kekule: Option<Vec<BondOrder>>,
}

impl MolGraph {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Total hydrogens attached to an atom, implicit plus bracket-explicit.
    pub fn hydrogens(&self, atom: usize) -> u8 {
        self.atoms[atom].explicit_h + self.implicit_h[atom]
    }

    /// Neighbor lists over all bonds.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for b in &self.bonds {
            adj[b.a].push(b.b);
            adj[b.b].push(b.a);
        }
        adj
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let adj = self.adjacency();
        let mut seen = vec![false; self.atoms.len()];
        let mut count = 0;
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    /// Cyclomatic number: bonds − atoms + components.
    pub fn ring_count(&self) -> usize {
        (self.bonds.len() + self.components()).saturating_sub(self.atoms.len())
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != "H").count()
    }

    /// Sum of bond orders at an atom, counting aromatic bonds as 1.5.
    pub fn bond_order_sum(&self, atom: usize) -> f64 {
        self.bonds
            .iter()
            .filter(|b| b.a == atom || b.b == atom)
            .map(|b| b.order.as_f64())
            .sum()
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.bonds
            .iter()
            .filter(|b| b.a == atom || b.b == atom)
            .count()
    }

    /// Indices of bonds that are not part of any cycle, found by bridge
    /// detection restricted to the given bond subset.
    pub(crate) fn bridges_within(&self, bond_subset: &[usize]) -> Vec<usize> {
        let n = self.atoms.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for &bi in bond_subset {
            let b = &self.bonds[bi];
            adj[b.a].push((b.b, bi));
            adj[b.b].push((b.a, bi));
        }
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![usize::MAX; n];
        let mut bridges = Vec::new();
        let mut timer = 0usize;
        // Iterative DFS to avoid recursion depth limits on long chains.
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            while !stack.is_empty() {
                let frame = stack.len() - 1;
                let (u, parent_edge, idx) = stack[frame];
                if idx == 0 {
                    disc[u] = timer;
                    low[u] = timer;
                    timer += 1;
                }
                if idx < adj[u].len() {
                    stack[frame].2 += 1;
                    let (v, edge) = adj[u][idx];
                    if edge == parent_edge {
                        continue;
                    }
                    if disc[v] == usize::MAX {
                        stack.push((v, edge, 0));
                    } else {
                        low[u] = low[u].min(disc[v]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[u]);
                        if low[u] > disc[p] {
                            bridges.push(parent_edge);
                        }
                    }
                }
            }
        }
        bridges
    }
}

/// True when the symbol belongs to the bracket-free organic subset.
pub fn is_organic_subset(symbol: &str) -> bool {
    elements::ORGANIC_SUBSET.contains(&symbol)
}
