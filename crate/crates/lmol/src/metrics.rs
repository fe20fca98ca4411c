//! Evaluation metrics and CSV report emission.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use smiles::{parse, substructure_match, to_pattern, validate};

use crate::error::Error;

/// Percentage of generated strings absent from the reference set. Plain
/// string comparison: synonymous SMILES are intentionally not unified.
pub fn novelty(generated: &[String], reference: &HashSet<String>) -> f64 {
    if generated.is_empty() {
        return 100.0;
    }
    let novel = generated.iter().filter(|s| !reference.contains(*s)).count();
    100.0 * novel as f64 / generated.len() as f64
}

/// Percentage of distinct strings in the batch.
pub fn uniqueness(generated: &[String]) -> Result<f64, Error> {
    if generated.is_empty() {
        return Err(Error::data("uniqueness of an empty batch is undefined"));
    }
    let distinct: HashSet<&String> = generated.iter().collect();
    Ok(100.0 * distinct.len() as f64 / generated.len() as f64)
}

/// Uniqueness over the first `k` samples (all of them when fewer).
pub fn uniqueness_at(generated: &[String], k: usize) -> Result<f64, Error> {
    uniqueness(&generated[..generated.len().min(k)])
}

/// Percentage of strings that parse and pass the valence checks.
pub fn validity(generated: &[String]) -> f64 {
    if generated.is_empty() {
        return 100.0;
    }
    let ok = generated.iter().filter(|s| validate(s).is_valid()).count();
    100.0 * ok as f64 / generated.len() as f64
}

/// Mean absolute deviation between actual and target values.
pub fn mad(actual: &[f64], target: &[f64]) -> Result<f64, Error> {
    if actual.len() != target.len() {
        return Err(Error::data(format!(
            "{} actual values vs {} targets",
            actual.len(),
            target.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::data("MAD of an empty set is undefined"));
    }
    Ok(actual
        .iter()
        .zip(target)
        .map(|(a, t)| (a - t).abs())
        .sum::<f64>()
        / actual.len() as f64)
}

/// Percentage of generated molecules containing the fragment under
/// bond-order-stripped connectivity matching. Unparseable outputs count
/// against the total as non-matches.
pub fn substructure_match_rate(generated: &[String], fragment: &str) -> Result<f64, Error> {
    let frag_graph =
        parse(fragment).map_err(|e| Error::data(format!("unparseable fragment: {e}")))?;
    let pattern = to_pattern(&frag_graph);
    if pattern.is_empty() {
        return Err(Error::data("empty fragment pattern"));
    }
    if generated.is_empty() {
        return Ok(0.0);
    }
    let hits = generated
        .iter()
        .filter(|s| {
            parse(s)
                .map(|g| substructure_match(&pattern, &g))
                .unwrap_or(false)
        })
        .count();
    Ok(100.0 * hits as f64 / generated.len() as f64)
}

/// Writes `summary.csv` (metric,value) and `detail.csv` (one row per
/// generated sample) into `dir`.
pub fn emit_report(
    dir: &Path,
    summary: &[(String, f64)],
    detail_header: &[String],
    detail_rows: &[Vec<String>],
) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    let mut text = String::from("metric,value\n");
    for (name, value) in summary {
        text.push_str(&format!("{name},{value}\n"));
    }
    fs::write(dir.join("summary.csv"), text)?;

    let mut text = detail_header.join(",");
    text.push('\n');
    for row in detail_rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(dir.join("detail.csv"), text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> HashSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn strings(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn novelty_examples() {
        let reference = set(&["CC", "CCO"]);
        assert_eq!(novelty(&strings(&["CCC", "CCCC"]), &reference), 100.0);
        assert_eq!(novelty(&strings(&["CC", "CCO"]), &reference), 0.0);
        let half = novelty(
            &strings(&["CC", "CCO", "CCC", "CCCC", "CCN", "CCS", "CCCO", "CCCN", "CCCS", "CCCF"]),
            &set(&["CC", "CCO", "CCC", "CCCC", "CCN"]),
        );
        assert_eq!(half, 50.0);
    }

    #[test]
    fn novelty_is_antitone_in_the_reference() {
        let generated = strings(&["CC", "CCO", "CCC"]);
        let small = set(&["CC"]);
        let big = set(&["CC", "CCO"]);
        assert!(novelty(&generated, &big) <= novelty(&generated, &small));
    }

    #[test]
    fn uniqueness_examples() {
        assert_eq!(uniqueness(&strings(&["A", "B", "C"])).unwrap(), 100.0);
        assert!((uniqueness(&strings(&["A", "A", "A", "A"])).unwrap() - 25.0).abs() < 1e-12);
        let u = uniqueness(&strings(&["CC", "CC", "CCO"])).unwrap();
        assert!((u - 200.0 / 3.0).abs() < 1e-9);
        assert!(uniqueness(&[]).is_err());
    }

    #[test]
    fn duplicating_a_list_cannot_raise_uniqueness() {
        let list = strings(&["A", "B", "B", "C"]);
        let doubled: Vec<String> = list.iter().chain(&list).cloned().collect();
        assert!(uniqueness(&doubled).unwrap() <= uniqueness(&list).unwrap());
    }

    #[test]
    fn validity_examples() {
        assert_eq!(validity(&strings(&["CCO"])), 100.0);
        assert_eq!(validity(&strings(&["C1CC"])), 0.0);
        assert_eq!(validity(&strings(&["CCO", "CC", "CCC", "C1CC"])), 75.0);
    }

    #[test]
    fn mad_examples() {
        assert_eq!(mad(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mad(&[2.5, 3.5], &[2.0, 4.0]).unwrap(), 0.5);
        assert_eq!(mad(&[1.0], &[4.0]).unwrap(), 3.0);
        assert!(mad(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mad(&[], &[]).is_err());
    }

    #[test]
    fn substructure_rate_examples() {
        assert_eq!(
            substructure_match_rate(&strings(&["Cc1ccccc1"]), "c1ccccc1").unwrap(),
            100.0
        );
        assert_eq!(substructure_match_rate(&strings(&["CC"]), "CCO").unwrap(), 0.0);
        assert_eq!(
            substructure_match_rate(&strings(&["c1ccsc1"]), "C1=CSC=C1").unwrap(),
            100.0
        );
        // Unparseable outputs count as non-matches against the total.
        assert_eq!(
            substructure_match_rate(&strings(&["Cc1ccccc1", "C1CC"]), "c1ccccc1").unwrap(),
            50.0
        );
        assert!(substructure_match_rate(&strings(&["CC"]), "C1CC").is_err());
    }

    #[test]
    fn report_files() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(
            dir.path(),
            &[("validity".into(), 98.5), ("novelty".into(), 77.0)],
            &["smiles".into(), "valid".into()],
            &[vec!["CCO".into(), "1".into()], vec!["C1CC".into(), "0".into()]],
        )
        .unwrap();
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 3);
        let detail = fs::read_to_string(dir.path().join("detail.csv")).unwrap();
        assert_eq!(detail.lines().count(), 3);
        assert!(detail.starts_with("smiles,valid\n"));
    }

    #[test]
    fn empty_detail_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(dir.path(), &[], &["smiles".into()], &[]).unwrap();
        let detail = fs::read_to_string(dir.path().join("detail.csv")).unwrap();
        assert_eq!(detail, "smiles\n");
    }
}
