//! `key = value` run configuration files: UTF-8, one setting per line,
//! `#` comments. Flags override file values.

use std::collections::BTreeMap;
use std::path::Path;

use lmol::Error;

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(format!(
                    "line {}: expected key = value, found {raw:?}",
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(RunConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(format!("cannot parse {key} = {v:?}"))),
        }
    }

    /// Ordered `condition.<i>.name` bindings.
    pub fn condition_names(&self) -> Result<Vec<String>, Error> {
        let mut names = Vec::new();
        for i in 0.. {
            match self.get(&format!("condition.{i}.name")) {
                Some(name) => names.push(name.to_string()),
                None => break,
            }
        }
        // Reject gaps like condition.0 + condition.2.
        let extra = self
            .values
            .keys()
            .filter(|k| k.starts_with("condition.") && k.ends_with(".name"))
            .count();
        if extra != names.len() {
            return Err(Error::config(
                "condition.<i>.name keys must be contiguous from 0",
            ));
        }
        Ok(names)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_and_comments() {
        let cfg = RunConfig::parse(
            "# run settings\nmodel.d_emb = 64\ntrain.seed=7 # tail comment\n\ncondition.0.name = mol_weight_scaled\n",
        )
        .unwrap();
        assert_eq!(cfg.get("model.d_emb"), Some("64"));
        assert_eq!(cfg.get_parsed::<u64>("train.seed").unwrap(), Some(7));
        assert_eq!(cfg.condition_names().unwrap(), vec!["mol_weight_scaled"]);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(RunConfig::parse("just words\n").is_err());
    }

    #[test]
    fn rejects_condition_gaps() {
        let cfg = RunConfig::parse("condition.0.name = a\ncondition.2.name = b\n").unwrap();
        assert!(cfg.condition_names().is_err());
    }
}
