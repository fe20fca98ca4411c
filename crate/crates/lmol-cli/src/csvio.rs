//! Minimal CSV handling for the dataset and report formats: header row,
//! comma-separated, no quoting (SMILES never contain commas).

use std::path::Path;

use lmol::Error;

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::data(format!("{}: empty file", path.display())))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let rows = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split(',').map(|s| s.trim().to_string()).collect())
            .collect();
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Reads generated SMILES either from a plain one-per-line file or from a
/// CSV with a `smiles` column; returns the strings plus the table when the
/// input was a CSV (for per-row target columns).
pub fn load_generated(path: &Path) -> Result<(Vec<String>, Option<Table>), Error> {
    let text = std::fs::read_to_string(path)?;
    let first = text.lines().next().unwrap_or("");
    if first.split(',').any(|h| h.trim() == "smiles") {
        let table = Table::load(path)?;
        let col = table.column("smiles").expect("checked above");
        let smiles = table.rows.iter().map(|r| r[col].clone()).collect();
        Ok((smiles, Some(table)))
    } else {
        // Empty lines are kept: a generation that stopped immediately is
        // still a sample and counts against validity.
        Ok((text.lines().map(|l| l.trim().to_string()).collect(), None))
    }
}
