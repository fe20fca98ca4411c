//! Subgraph-isomorphism matching of connectivity patterns against molecular
//! graphs.

use crate::graph::MolGraph;
use crate::pattern::Pattern;

/// True iff an injective mapping of pattern nodes to graph atoms exists
/// that preserves node labels and every pattern edge. Backtracking search
/// with label and degree pruning; pattern nodes are visited in a
/// connectivity-first order so each step is constrained by its already
/// mapped neighbors.
pub fn substructure_match(pattern: &Pattern, g: &MolGraph) -> bool {
    debug_assert!(!pattern.is_empty(), "pattern must be non-empty");
    let n_p = pattern.len();
    let n_g = g.atoms.len();
    if n_p > n_g {
        return false;
    }

    let p_adj = pattern.adjacency();
    let g_adj = g.adjacency();
    let g_labels: Vec<&str> = g.atoms.iter().map(|a| a.element.as_str()).collect();
    let p_deg: Vec<usize> = (0..n_p).map(|i| p_adj[i].len()).collect();
    let g_deg: Vec<usize> = (0..n_g).map(|i| g_adj[i].len()).collect();

    let mut g_matrix = vec![false; n_g * n_g];
    for (u, nbrs) in g_adj.iter().enumerate() {
        for &v in nbrs {
            g_matrix[u * n_g + v] = true;
        }
    }

    // Visit order: BFS over pattern connectivity so all but component roots
    // extend an already mapped frontier.
    let order = bfs_order(&p_adj);

    let mut mapping = vec![usize::MAX; n_p];
    let mut used = vec![false; n_g];
    backtrack(
        0,
        &order,
        pattern,
        &p_adj,
        &p_deg,
        g,
        &g_labels,
        &g_deg,
        &g_matrix,
        n_g,
        &mut mapping,
        &mut used,
    )
}

fn bfs_order(p_adj: &[Vec<usize>]) -> Vec<usize> {
    let n = p_adj.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &p_adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    depth: usize,
    order: &[usize],
    pattern: &Pattern,
    p_adj: &[Vec<usize>],
    p_deg: &[usize],
    g: &MolGraph,
    g_labels: &[&str],
    g_deg: &[usize],
    g_matrix: &[bool],
    n_g: usize,
    mapping: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let u = order[depth];
    let label = &pattern.labels[u];
    'candidates: for cand in 0..n_g {
        if used[cand] || g_labels[cand] != label || g_deg[cand] < p_deg[u] {
            continue;
        }
        for &v in &p_adj[u] {
            let mv = mapping[v];
            if mv != usize::MAX && !g_matrix[cand * n_g + mv] {
                continue 'candidates;
            }
        }
        mapping[u] = cand;
        used[cand] = true;
        if backtrack(
            depth + 1,
            order,
            pattern,
            p_adj,
            p_deg,
            g,
            g_labels,
            g_deg,
            g_matrix,
            n_g,
            mapping,
            used,
        ) {
            return true;
        }
        mapping[u] = usize::MAX;
        used[cand] = false;
    }
    false
}

/// Exhaustive oracle for small graphs: enumerates every label-compatible
/// injective assignment and verifies all pattern edges at the end, with no
/// pruning beyond labels. Must agree with [`substructure_match`] everywhere.
pub fn brute_force_match(pattern: &Pattern, g: &MolGraph) -> bool {
    debug_assert!(g.atoms.len() <= 12, "oracle is for small graphs");
    let n_p = pattern.len();
    let n_g = g.atoms.len();
    if n_p > n_g {
        return false;
    }
    let g_labels: Vec<&str> = g.atoms.iter().map(|a| a.element.as_str()).collect();
    let g_adj = g.adjacency();
    let mut g_matrix = vec![false; n_g * n_g];
    for (u, nbrs) in g_adj.iter().enumerate() {
        for &v in nbrs {
            g_matrix[u * n_g + v] = true;
        }
    }
    let mut mapping = vec![usize::MAX; n_p];
    let mut used = vec![false; n_g];

    fn enumerate(
        next: usize,
        pattern: &Pattern,
        g_labels: &[&str],
        g_matrix: &[bool],
        n_g: usize,
        mapping: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if next == pattern.len() {
            return pattern
                .edges
                .iter()
                .all(|&(a, b)| g_matrix[mapping[a] * n_g + mapping[b]]);
        }
        for cand in 0..n_g {
            if used[cand] || g_labels[cand] != pattern.labels[next] {
                continue;
            }
            mapping[next] = cand;
            used[cand] = true;
            if enumerate(next + 1, pattern, g_labels, g_matrix, n_g, mapping, used) {
                return true;
            }
            used[cand] = false;
            mapping[next] = usize::MAX;
        }
        false
    }

    enumerate(0, pattern, &g_labels, &g_matrix, n_g, &mut mapping, &mut used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::pattern::to_pattern;

    fn pat(s: &str) -> Pattern {
        to_pattern(&parse(s).unwrap())
    }

    #[test]
    fn benzene_in_toluene() {
        assert!(substructure_match(&pat("c1ccccc1"), &parse("Cc1ccccc1").unwrap()));
    }

    #[test]
    fn size_rules_out_match() {
        assert!(!substructure_match(&pat("CCO"), &parse("CC").unwrap()));
    }

    #[test]
    fn bond_orders_do_not_matter() {
        assert!(substructure_match(&pat("C1=CSC=C1"), &parse("c1ccsc1").unwrap()));
        assert!(substructure_match(&pat("c1ccsc1"), &parse("C1=CSC=C1").unwrap()));
    }

    #[test]
    fn single_atom_pattern() {
        assert!(substructure_match(&pat("C"), &parse("CCO").unwrap()));
        assert!(!substructure_match(&pat("N"), &parse("CCO").unwrap()));
    }

    #[test]
    fn self_match() {
        for s in ["CCO", "c1ccccc1", "CC(=O)OC1=CC=CC=C1C(=O)O", "C1CC1C1CC1"] {
            let g = parse(s).unwrap();
            assert!(substructure_match(&to_pattern(&g), &g), "{s}");
        }
    }

    #[test]
    fn oracle_and_matcher_agree_on_handpicked_cases() {
        let cases = [
            ("CCO", "CCCO", true),
            ("CCO", "COC", false),
            ("C1CC1", "C1CCC1", false),
            ("C1CC1", "CC1CC1", true),
            ("CC(C)C", "CCCC", false),
            ("CC(C)C", "CC(C)(C)C", true),
        ];
        for (p, g, expect) in cases {
            let pattern = pat(p);
            let graph = parse(g).unwrap();
            assert_eq!(substructure_match(&pattern, &graph), expect, "{p} in {g}");
            assert_eq!(brute_force_match(&pattern, &graph), expect, "oracle {p} in {g}");
        }
    }
}
