//! Validator agreement against the curated valid/invalid list.
//!
//! The labels record the verdict a standard cheminformatics toolkit gives
//! for each string. The built-in validator must agree on at least 195 of
//! the 200 cases; any disagreement is printed so it stays documented rather
//! than hidden.

use smiles::curated::CURATED_VALIDITY;
use smiles::validate;

#[test]
fn curated_list_agreement() {
    let mut disagreements = Vec::new();
    for (s, expected) in CURATED_VALIDITY {
        let got = validate(s).is_valid();
        if got != expected {
            disagreements.push((s, expected, got));
        }
    }
    for (s, expected, got) in &disagreements {
        eprintln!(
            "validator disagrees on {s:?}: toolkit says valid={expected}, ours says valid={got}"
        );
    }
    let agree = CURATED_VALIDITY.len() - disagreements.len();
    assert!(
        agree >= 195,
        "validator agrees on only {agree}/200 curated cases"
    );
}

#[test]
fn list_has_two_hundred_cases() {
    assert_eq!(CURATED_VALIDITY.len(), 200);
    let valid = CURATED_VALIDITY.iter().filter(|(_, v)| *v).count();
    assert!(valid > 100, "list should be majority-valid like real corpora");
}
