//! The frozen token vocabulary.
//!
//! File format: UTF-8, one token per line, line number = id, first four
//! lines fixed to the reserved tokens.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::SmilesError;

pub const PAD_ID: u32 = 0;
pub const CLS_ID: u32 = 1;
pub const SEP_ID: u32 = 2;
pub const UNK_ID: u32 = 3;

pub const RESERVED: [&str; 4] = ["[PAD]", "[CLS]", "[SEP]", "[UNK]"];

#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary from corpus tokens: reserved ids first, then the
    /// distinct tokens in sorted order.
    pub fn from_corpus_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut distinct: Vec<String> = tokens
            .into_iter()
            .map(Into::into)
            .filter(|t| !RESERVED.contains(&t.as_str()))
            .collect();
        distinct.sort();
        distinct.dedup();

        let mut all: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        all.extend(distinct);
        Self::from_ordered(all)
    }

    fn from_ordered(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Id for a token; unknown tokens map to `[UNK]`.
    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn is_reserved(&self, id: u32) -> bool {
        id < RESERVED.len() as u32
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut f = fs::File::create(path)?;
        for t in &self.tokens {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SmilesError> {
        let text = fs::read_to_string(path)
            .map_err(|e| SmilesError::VocabFormat(format!("{}: {e}", path.display())))?;
        let tokens: Vec<String> = text.lines().map(str::to_string).collect();
        if tokens.len() < RESERVED.len() {
            return Err(SmilesError::VocabFormat(
                "fewer lines than reserved tokens".into(),
            ));
        }
        for (i, r) in RESERVED.iter().enumerate() {
            if tokens[i] != *r {
                return Err(SmilesError::VocabFormat(format!(
                    "line {i} must be {r}, found {}",
                    tokens[i]
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for t in &tokens {
            if !seen.insert(t) {
                return Err(SmilesError::VocabFormat(format!("duplicate token {t}")));
            }
        }
        Ok(Self::from_ordered(tokens))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_ids_are_fixed_and_distinct() {
        let v = Vocabulary::from_corpus_tokens(["C", "c", "1", "("]);
        assert_eq!(v.id("[PAD]"), PAD_ID);
        assert_eq!(v.id("[CLS]"), CLS_ID);
        assert_eq!(v.id("[SEP]"), SEP_ID);
        assert_eq!(v.id("[UNK]"), UNK_ID);
        assert_eq!(v.len(), 8);
    }

    #[test]
    fn unknown_token_maps_to_unk() {
        let v = Vocabulary::from_corpus_tokens(["C"]);
        assert_eq!(v.id("N"), UNK_ID);
    }

    #[test]
    fn bijective_over_non_reserved() {
        let v = Vocabulary::from_corpus_tokens(["C", "N", "C"]);
        for id in RESERVED.len() as u32..v.len() as u32 {
            let t = v.token(id).unwrap();
            assert_eq!(v.id(t), id);
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = std::env::temp_dir().join("vocab_test_rt");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("vocab.txt");
        let v = Vocabulary::from_corpus_tokens(["C", "N", "[nH]"]);
        v.save(&path).unwrap();
        let loaded = Vocabulary::load(&path).unwrap();
        assert_eq!(loaded.len(), v.len());
        assert_eq!(loaded.id("[nH]"), v.id("[nH]"));
    }

    #[test]
    fn corrupt_header_is_rejected() {
        let dir = std::env::temp_dir().join("vocab_test_bad");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("vocab.txt");
        std::fs::write(&path, "[PAD]\n[CLS]\nC\n").unwrap();
        assert!(Vocabulary::load(&path).is_err());
    }
}
