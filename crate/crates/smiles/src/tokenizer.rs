//! Character-level SMILES tokenization.
//!
//! Splitting happens at the character level with two exceptions: bracket
//! groups `[...]` form a single token, and the two-letter halogens `Cl` and
//! `Br` stay whole so their element identity survives.

use crate::error::SmilesError;
use crate::vocab::Vocabulary;

/// Splits a SMILES string into surface tokens.
pub fn tokenize_text(text: &str) -> Result<Vec<String>, SmilesError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '[' => {
                let close = chars[i..]
                    .iter()
                    .position(|&c| c == ']')
                    .ok_or(SmilesError::Tokenize {
                        pos: i,
                        msg: "unterminated '['".into(),
                    })?;
                tokens.push(chars[i..=i + close].iter().collect());
                i += close + 1;
            }
            'C' if chars.get(i + 1) == Some(&'l') => {
                tokens.push("Cl".into());
                i += 2;
            }
            'B' if chars.get(i + 1) == Some(&'r') => {
                tokens.push("Br".into());
                i += 2;
            }
            c => {
                tokens.push(c.to_string());
                i += 1;
            }
        }
    }
    Ok(tokens)
}

/// Tokenizes against a vocabulary; tokens outside it map to `[UNK]`.
pub fn tokenize(text: &str, vocab: &Vocabulary) -> Result<Vec<u32>, SmilesError> {
    Ok(tokenize_text(text)?
        .iter()
        .map(|t| vocab.id(t))
        .collect())
}

/// Joins token ids back into text, dropping the reserved ids.
pub fn detokenize(ids: &[u32], vocab: &Vocabulary) -> Result<String, SmilesError> {
    let mut out = String::new();
    for &id in ids {
        if vocab.is_reserved(id) {
            continue;
        }
        out.push_str(vocab.token(id).ok_or(SmilesError::InvalidTokenId(id))?);
    }
    Ok(out)
}
