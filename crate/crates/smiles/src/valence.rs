//! Valence checking and aromatic-system resolution.
//!
//! Aromatic rings are validated by Kekulé feasibility: there must exist an
//! alternating single/double assignment of the aromatic bonds consistent
//! with every atom's allowed valence. Isolated simple rings additionally
//! need a 4n+2 π-electron count; fused systems are accepted on feasibility
//! alone, which keeps common polycyclics in line with toolkit behavior.

use crate::elements::{allowed_valences, atomic_weight};
use crate::graph::{BondOrder, MolGraph};
use crate::parser::parse;

/// Outcome of validity checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid { reason: String },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    fn invalid(reason: impl Into<String>) -> Self {
        Verdict::Invalid {
            reason: reason.into(),
        }
    }
}

/// Parses and checks a SMILES string: syntactic well-formedness, aromatic
/// ring feasibility, and per-atom valence limits.
pub fn validate(text: &str) -> Verdict {
    match parse(text) {
        Err(e) => Verdict::invalid(e.to_string()),
        Ok(g) => validate_graph(&g),
    }
}

pub fn validate_graph(g: &MolGraph) -> Verdict {
    // Aromatic bonds must join aromatic atoms.
    for b in &g.bonds {
        if b.order == BondOrder::Aromatic && !(g.atoms[b.a].aromatic && g.atoms[b.b].aromatic) {
            return Verdict::invalid("aromatic bond between non-aromatic atoms");
        }
    }
    // Every aromatic atom must sit in an aromatic ring: after acyclic
    // aromatic bonds were demoted, that means aromatic degree >= 2.
    let arom_deg = aromatic_degrees(g);
    for (i, a) in g.atoms.iter().enumerate() {
        if a.aromatic && arom_deg[i] < 2 {
            return Verdict::invalid("aromatic atom not in an aromatic ring");
        }
    }
    let Some(orders) = &g.kekule else {
        return Verdict::invalid("aromatic system admits no valid alternating bond assignment");
    };
    if let Some(reason) = huckel_violation(g, orders) {
        return Verdict::invalid(reason);
    }
    // Per-atom valence against the Kekulé-resolved orders.
    for (i, atom) in g.atoms.iter().enumerate() {
        let Some(allowed) = allowed_valences(&atom.element, atom.charge) else {
            continue;
        };
        let mut total = 0u32;
        for (bi, b) in g.bonds.iter().enumerate() {
            if b.a == i || b.b == i {
                total += match orders[bi] {
                    BondOrder::Single => 1,
                    BondOrder::Double => 2,
                    BondOrder::Triple => 3,
                    BondOrder::Aromatic => unreachable!("kekulized orders"),
                };
            }
        }
        total += g.hydrogens(i) as u32;
        let max = *allowed.iter().max().unwrap() as u32;
        if total > max {
            return Verdict::invalid(format!(
                "valence {total} exceeds maximum {max} for {}{}",
                atom.element,
                charge_suffix(atom.charge)
            ));
        }
        // Organic-subset atoms had hydrogens filled up to an allowed
        // valence; failing to land on one means the explicit bonds already
        // overshot every smaller option.
        if !atom.bracket && !allowed.contains(&(total as u8)) {
            return Verdict::invalid(format!(
                "valence {total} not allowed for {}",
                atom.element
            ));
        }
    }
    if atomic_weight_sum(g).is_none() {
        return Verdict::invalid("unknown element weight");
    }
    Verdict::Valid
}

fn charge_suffix(charge: i8) -> String {
    match charge {
        0 => String::new(),
        c if c > 0 => format!("+{c}"),
        c => format!("{c}"),
    }
}

fn atomic_weight_sum(g: &MolGraph) -> Option<f64> {
    let mut total = 0.0;
    for (i, a) in g.atoms.iter().enumerate() {
        total += atomic_weight(&a.element)?;
        total += g.hydrogens(i) as f64 * atomic_weight("H").unwrap();
    }
    Some(total)
}

fn aromatic_degrees(g: &MolGraph) -> Vec<usize> {
    let mut deg = vec![0usize; g.atoms.len()];
    for b in &g.bonds {
        if b.order == BondOrder::Aromatic {
            deg[b.a] += 1;
            deg[b.b] += 1;
        }
    }
    deg
}

/// Rewrites aromatic bonds that lie on no cycle (of the aromatic subgraph)
/// to single bonds: an implicit bond between two aromatic rings, as in
/// biphenyl written without the explicit `-`, is a plain σ bond.
pub(crate) fn demote_acyclic_aromatic_bonds(g: &mut MolGraph) {
    let arom: Vec<usize> = g
        .bonds
        .iter()
        .enumerate()
        .filter(|(_, b)| b.order == BondOrder::Aromatic)
        .map(|(i, _)| i)
        .collect();
    if arom.is_empty() {
        return;
    }
    for bi in g.bridges_within(&arom) {
        g.bonds[bi].order = BondOrder::Single;
    }
}

/// How many of an atom's aromatic bonds must become double bonds: an exact
/// requirement for most atoms, a free choice only for elements outside the
/// valence table.
#[derive(Clone, Copy, Debug)]
struct PiNeed {
    min: u8,
    max: u8,
}

/// Computes per-atom double-bond requirements for the aromatic assignment.
/// `None` means some atom admits no consistent requirement.
fn pi_needs(g: &MolGraph, arom_deg: &[usize]) -> Option<Vec<Option<PiNeed>>> {
    let mut needs = vec![None; g.atoms.len()];
    for (i, atom) in g.atoms.iter().enumerate() {
        if arom_deg[i] == 0 {
            continue;
        }
        // Baseline valence: aromatic bonds as singles, plus everything
        // already fixed.
        let mut base = atom.explicit_h as u32;
        let mut has_exo_multiple = false;
        for b in &g.bonds {
            if b.a == i || b.b == i {
                base += match b.order {
                    BondOrder::Single => 1,
                    BondOrder::Double => {
                        has_exo_multiple = true;
                        2
                    }
                    BondOrder::Triple => {
                        has_exo_multiple = true;
                        3
                    }
                    BondOrder::Aromatic => 1,
                };
            }
        }
        let need = if !atom.bracket {
            match atom.element.as_str() {
                // Aromatic carbon is sp2: exactly one π bond, supplied by
                // the ring unless an exocyclic double bond already does.
                "C" => {
                    let k = if has_exo_multiple { 0 } else { 1 };
                    if base + k > 4 {
                        return None;
                    }
                    PiNeed { min: k as u8, max: k as u8 }
                }
                // Aromatic boron contributes an empty orbital.
                "B" => {
                    if base > 3 {
                        return None;
                    }
                    PiNeed { min: 0, max: 0 }
                }
                // Plain aromatic N/P/O/S take no implicit hydrogens: their
                // bonds alone must land exactly on an allowed valence.
                _ => {
                    let allowed = allowed_valences(&atom.element, 0).expect("organic subset");
                    let k = (0u8..=1)
                        .find(|k| allowed.contains(&((base + *k as u32) as u8)))?;
                    PiNeed { min: k, max: k }
                }
            }
        } else {
            match allowed_valences(&atom.element, atom.charge) {
                Some(allowed) => {
                    let ks: Vec<u8> = (0u8..=1)
                        .filter(|k| allowed.contains(&((base + *k as u32) as u8)))
                        .collect();
                    if ks.is_empty() {
                        return None;
                    }
                    PiNeed {
                        min: *ks.first().unwrap(),
                        max: *ks.last().unwrap(),
                    }
                }
                None => PiNeed { min: 0, max: 1 },
            }
        };
        needs[i] = Some(need);
    }
    Some(needs)
}

/// Searches for a single/double assignment of the aromatic bonds meeting
/// every atom's π requirement. Returns the full per-bond order list with
/// aromatic bonds resolved, or `None` when no assignment exists.
pub(crate) fn kekulize(g: &MolGraph) -> Option<Vec<BondOrder>> {
    let mut orders: Vec<BondOrder> = g.bonds.iter().map(|b| b.order).collect();
    let arom: Vec<usize> = (0..g.bonds.len())
        .filter(|&i| g.bonds[i].order == BondOrder::Aromatic)
        .collect();
    if arom.is_empty() {
        return Some(orders);
    }
    for &bi in &arom {
        let b = &g.bonds[bi];
        if !(g.atoms[b.a].aromatic && g.atoms[b.b].aromatic) {
            return None;
        }
    }
    let arom_deg = aromatic_degrees(g);
    let needs = pi_needs(g, &arom_deg)?;

    let mut assigned = vec![0u8; g.atoms.len()];
    let mut remaining: Vec<u8> = arom_deg.iter().map(|&d| d as u8).collect();
    let mut choice = vec![false; arom.len()];

    fn feasible(atom: usize, assigned: &[u8], remaining: &[u8], needs: &[Option<PiNeed>]) -> bool {
        let Some(need) = needs[atom] else { return true };
        assigned[atom] <= need.max && assigned[atom] + remaining[atom] >= need.min
    }

    fn dfs(
        idx: usize,
        arom: &[usize],
        bonds: &MolGraph,
        needs: &[Option<PiNeed>],
        assigned: &mut [u8],
        remaining: &mut [u8],
        choice: &mut [bool],
    ) -> bool {
        if idx == arom.len() {
            return true;
        }
        let b = &bonds.bonds[arom[idx]];
        for &double in &[false, true] {
            remaining[b.a] -= 1;
            remaining[b.b] -= 1;
            if double {
                assigned[b.a] += 1;
                assigned[b.b] += 1;
            }
            choice[idx] = double;
            if feasible(b.a, assigned, remaining, needs)
                && feasible(b.b, assigned, remaining, needs)
                && dfs(idx + 1, arom, bonds, needs, assigned, remaining, choice)
            {
                return true;
            }
            if double {
                assigned[b.a] -= 1;
                assigned[b.b] -= 1;
            }
            remaining[b.a] += 1;
            remaining[b.b] += 1;
        }
        false
    }

    if !dfs(
        0,
        &arom,
        g,
        &needs,
        &mut assigned,
        &mut remaining,
        &mut choice,
    ) {
        return None;
    }
    for (slot, &bi) in arom.iter().enumerate() {
        orders[bi] = if choice[slot] {
            BondOrder::Double
        } else {
            BondOrder::Single
        };
    }
    Some(orders)
}

/// Checks 4n+2 π electrons on isolated simple aromatic rings. Returns a
/// reason on violation.
fn huckel_violation(g: &MolGraph, orders: &[BondOrder]) -> Option<String> {
    let arom: Vec<usize> = (0..g.bonds.len())
        .filter(|&i| g.bonds[i].order == BondOrder::Aromatic)
        .collect();
    if arom.is_empty() {
        return None;
    }
    let arom_deg = aromatic_degrees(g);
    // Connected components of the aromatic subgraph.
    let n = g.atoms.len();
    let mut comp = vec![usize::MAX; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &bi in &arom {
        adj[g.bonds[bi].a].push(g.bonds[bi].b);
        adj[g.bonds[bi].b].push(g.bonds[bi].a);
    }
    let mut n_comp = 0;
    for start in 0..n {
        if comp[start] != usize::MAX || arom_deg[start] == 0 {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = n_comp;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = n_comp;
                    stack.push(v);
                }
            }
        }
        n_comp += 1;
    }
    for c in 0..n_comp {
        let members: Vec<usize> = (0..n).filter(|&i| comp[i] == c).collect();
        // Only isolated simple cycles get the electron-count rule.
        if !members.iter().all(|&i| arom_deg[i] == 2) {
            continue;
        }
        let mut pi = 0u32;
        let mut assigned_double = vec![false; n];
        for &bi in &arom {
            let b = &g.bonds[bi];
            if comp[b.a] == c && orders[bi] == BondOrder::Double {
                pi += 2;
                assigned_double[b.a] = true;
                assigned_double[b.b] = true;
            }
        }
        for &i in &members {
            if !assigned_double[i] && is_lone_pair_donor(g, i) {
                pi += 2;
            }
        }
        if pi % 4 != 2 {
            return Some(format!(
                "aromatic ring with {pi} pi electrons violates the 4n+2 rule"
            ));
        }
    }
    None
}

fn is_lone_pair_donor(g: &MolGraph, i: usize) -> bool {
    let atom = &g.atoms[i];
    match atom.element.as_str() {
        "O" | "S" | "Se" | "Te" => true,
        "N" | "P" => true,
        "C" | "B" => atom.charge < 0,
        _ => false,
    }
}

/// Implicit hydrogen counts. Bracket atoms carry only their written
/// hydrogens; organic-subset atoms are topped up to the smallest allowed
/// valence, with plain aromatic N/P/O/S taking none by convention.
pub(crate) fn assign_implicit_h(g: &MolGraph) -> Vec<u8> {
    let mut out = vec![0u8; g.atoms.len()];
    for (i, atom) in g.atoms.iter().enumerate() {
        if atom.bracket {
            continue;
        }
        if atom.aromatic && !matches!(atom.element.as_str(), "C" | "B") {
            continue;
        }
        let sum = match &g.kekule {
            Some(orders) => {
                let mut s = 0u32;
                for (bi, b) in g.bonds.iter().enumerate() {
                    if b.a == i || b.b == i {
                        s += match orders[bi] {
                            BondOrder::Single => 1,
                            BondOrder::Double => 2,
                            BondOrder::Triple => 3,
                            BondOrder::Aromatic => 1,
                        };
                    }
                }
                s
            }
            None => g.bond_order_sum(i).ceil() as u32,
        };
        let allowed = allowed_valences(&atom.element, 0).expect("organic subset");
        if let Some(&v) = allowed.iter().find(|&&v| v as u32 >= sum) {
            out[i] = (v as u32 - sum) as u8;
        }
    }
    out
}
