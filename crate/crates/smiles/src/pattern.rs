//! Connectivity patterns: bond orders stripped, aromatic and aliphatic
//! forms unified, charges and hydrogen counts dropped. Only element identity
//! and adjacency remain.

use crate::graph::MolGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    /// Canonical element symbol per node.
    pub labels: Vec<String>,
    /// Undirected, deduplicated edges with `a < b`.
    pub edges: Vec<(usize, usize)>,
}

impl Pattern {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.labels.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == node || b == node)
            .count()
    }
}

/// Strips a molecular graph down to its connectivity pattern.
pub fn to_pattern(g: &MolGraph) -> Pattern {
    let labels = g.atoms.iter().map(|a| a.element.clone()).collect();
    let mut edges: Vec<(usize, usize)> = g
        .bonds
        .iter()
        .map(|b| (b.a.min(b.b), b.a.max(b.b)))
        .collect();
    edges.sort();
    edges.dedup();
    Pattern { labels, edges }
}
