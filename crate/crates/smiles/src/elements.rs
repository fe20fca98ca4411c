//! Element data: standard atomic weights and allowed valences.

/// (symbol, standard atomic weight). Covers the organic subset plus the
/// elements that show up in drug-like and materials corpora.
const WEIGHTS: &[(&str, f64)] = &[
    ("H", 1.008),
    ("He", 4.0026),
    ("Li", 6.94),
    ("Be", 9.0122),
    ("B", 10.81),
    ("C", 12.011),
    ("N", 14.007),
    ("O", 15.999),
    ("F", 18.998),
    ("Ne", 20.180),
    ("Na", 22.990),
    ("Mg", 24.305),
    ("Al", 26.982),
    ("Si", 28.085),
    ("P", 30.974),
    ("S", 32.06),
    ("Cl", 35.45),
    ("Ar", 39.95),
    ("K", 39.098),
    ("Ca", 40.078),
    ("Ti", 47.867),
    ("V", 50.942),
    ("Cr", 51.996),
    ("Mn", 54.938),
    ("Fe", 55.845),
    ("Co", 58.933),
    ("Ni", 58.693),
    ("Cu", 63.546),
    ("Zn", 65.38),
    ("Ga", 69.723),
    ("Ge", 72.630),
    ("As", 74.922),
    ("Se", 78.971),
    ("Br", 79.904),
    ("Kr", 83.798),
    ("Rb", 85.468),
    ("Sr", 87.62),
    ("Zr", 91.224),
    ("Mo", 95.95),
    ("Ru", 101.07),
    ("Rh", 102.91),
    ("Pd", 106.42),
    ("Ag", 107.87),
    ("Cd", 112.41),
    ("In", 114.82),
    ("Sn", 118.71),
    ("Sb", 121.76),
    ("Te", 127.60),
    ("I", 126.90),
    ("Xe", 131.29),
    ("Cs", 132.91),
    ("Ba", 137.33),
    ("W", 183.84),
    ("Pt", 195.08),
    ("Au", 196.97),
    ("Hg", 200.59),
    ("Tl", 204.38),
    ("Pb", 207.2),
    ("Bi", 208.98),
];

pub fn atomic_weight(symbol: &str) -> Option<f64> {
    WEIGHTS
        .iter()
        .find(|(s, _)| *s == symbol)
        .map(|(_, w)| *w)
}

pub fn is_known_element(symbol: &str) -> bool {
    atomic_weight(symbol).is_some()
}

/// Elements writable without brackets, uppercase form.
pub const ORGANIC_SUBSET: &[&str] = &["B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"];

/// Elements that may carry the aromatic (lowercase) flag.
pub const AROMATIC_CAPABLE: &[&str] = &["B", "C", "N", "O", "P", "S", "Se", "As", "Te"];

/// Allowed total valences for a neutral or charged atom, following the
/// common toolkit defaults. `None` means the element is not valence-checked
/// (metals and exotic charge states).
pub fn allowed_valences(symbol: &str, charge: i8) -> Option<&'static [u8]> {
    match (symbol, charge) {
        ("H", 0) => Some(&[1]),
        ("H", 1 | -1) => Some(&[0]),
        ("B", 0) => Some(&[3]),
        ("B", -1) => Some(&[4]),
        ("C", 0) => Some(&[4]),
        ("C", 1 | -1) => Some(&[3]),
        ("N", 0) => Some(&[3]),
        ("N", 1) => Some(&[4]),
        ("N", -1) => Some(&[2]),
        ("O", 0) => Some(&[2]),
        ("O", 1) => Some(&[3]),
        ("O", -1) => Some(&[1]),
        ("F" | "Cl" | "Br" | "I", 0) => Some(&[1]),
        ("F" | "Cl" | "Br" | "I", -1) => Some(&[0]),
        ("Si", 0) => Some(&[4]),
        ("P", 0) => Some(&[3, 5]),
        ("P", 1) => Some(&[4]),
        ("P", -1) => Some(&[2]),
        ("S", 0) => Some(&[2, 4, 6]),
        ("S", 1) => Some(&[3, 5]),
        ("S", -1) => Some(&[1]),
        ("Se" | "Te", 0) => Some(&[2, 4, 6]),
        ("As", 0) => Some(&[3, 5]),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_of_common_elements() {
        assert_eq!(atomic_weight("C"), Some(12.011));
        assert_eq!(atomic_weight("Cl"), Some(35.45));
        assert_eq!(atomic_weight("Xx"), None);
    }

    #[test]
    fn charge_shifts_nitrogen_valence() {
        assert_eq!(allowed_valences("N", 0), Some(&[3][..]));
        assert_eq!(allowed_valences("N", 1), Some(&[4][..]));
        assert_eq!(allowed_valences("Fe", 2), None);
    }
}
