//! Dataset preprocessing: filtering, descriptor computation, vocabulary
//! construction, tokenization, and serialization.

use std::fmt::Write as _;
use std::path::Path;

use lmol::dataset::{Dataset, EncodedRow};
use lmol::Error;
use smiles::descriptors::{descriptor_by_name, BUILTIN_COLUMNS};
use smiles::{descriptors, parse, tokenize, tokenize_text, Vocabulary, UNK_ID};

use crate::csvio::Table;

#[derive(Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub input_rows: usize,
    pub survivors: usize,
    pub rejected_salt: usize,
    pub rejected_parse: usize,
    pub rejected_too_long: usize,
    pub rejected_bad_property: usize,
    pub rejected_unknown_token: usize,
}

impl Stats {
    pub fn rejected_total(&self) -> usize {
        self.rejected_salt
            + self.rejected_parse
            + self.rejected_too_long
            + self.rejected_bad_property
            + self.rejected_unknown_token
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "input_rows {}", self.input_rows);
        let _ = writeln!(s, "survivors {}", self.survivors);
        let _ = writeln!(s, "rejected_salt {}", self.rejected_salt);
        let _ = writeln!(s, "rejected_parse {}", self.rejected_parse);
        let _ = writeln!(s, "rejected_too_long {}", self.rejected_too_long);
        let _ = writeln!(s, "rejected_bad_property {}", self.rejected_bad_property);
        let _ = writeln!(s, "rejected_unknown_token {}", self.rejected_unknown_token);
        let _ = writeln!(s, "rejected_total {}", self.rejected_total());
        s
    }
}

pub struct PreprocessOutput {
    pub dataset: Dataset,
    pub vocab: Vocabulary,
    pub stats: Stats,
}

/// Filters and tokenizes a CSV corpus. Rows are rejected for salts (any
/// `.`), parse failures, token counts over `max_tokens`, or non-finite
/// property values; built-in descriptor columns are computed when absent.
pub fn preprocess(
    table: &Table,
    condition_names: &[String],
    max_tokens: usize,
    existing_vocab: Option<Vocabulary>,
) -> Result<PreprocessOutput, Error> {
    let smiles_col = table
        .column("smiles")
        .ok_or_else(|| Error::data("input CSV has no 'smiles' column"))?;

    // Every referenced condition must be a CSV column or a built-in.
    let cond_cols: Vec<Option<usize>> = condition_names
        .iter()
        .map(|name| {
            let col = table.column(name);
            if col.is_none() && !BUILTIN_COLUMNS.contains(&name.as_str()) {
                return Err(Error::config(format!(
                    "condition column {name:?} is neither in the CSV nor a built-in descriptor"
                )));
            }
            Ok(col)
        })
        .collect::<Result<_, _>>()?;

    let mut stats = Stats {
        input_rows: table.rows.len(),
        ..Stats::default()
    };

    // First pass: filter and keep parsed survivors with their token text.
    struct Survivor {
        tokens: Vec<String>,
        props: Vec<f32>,
    }
    let mut survivors: Vec<Survivor> = Vec::new();
    'rows: for row in &table.rows {
        let text = &row[smiles_col];
        if text.contains('.') {
            stats.rejected_salt += 1;
            continue;
        }
        let Ok(tokens) = tokenize_text(text) else {
            stats.rejected_parse += 1;
            continue;
        };
        let Ok(graph) = parse(text) else {
            stats.rejected_parse += 1;
            continue;
        };
        if tokens.len() > max_tokens {
            stats.rejected_too_long += 1;
            continue;
        }
        let desc = descriptors(&graph);
        let mut props = Vec::with_capacity(condition_names.len());
        for (name, col) in condition_names.iter().zip(&cond_cols) {
            let value = match col {
                Some(c) => match row[*c].parse::<f32>() {
                    Ok(v) if v.is_finite() => v,
                    _ => {
                        stats.rejected_bad_property += 1;
                        continue 'rows;
                    }
                },
                None => descriptor_by_name(&desc, name).expect("checked built-in") as f32,
            };
            props.push(value);
        }
        survivors.push(Survivor { tokens, props });
    }

    let vocab = match existing_vocab {
        Some(v) => v,
        None => Vocabulary::from_corpus_tokens(
            survivors.iter().flat_map(|s| s.tokens.iter().cloned()),
        ),
    };

    // Second pass: tokenize to ids; with a supplied vocabulary, rows with
    // unknown tokens are rejected rather than trained as [UNK].
    let mut rows = Vec::with_capacity(survivors.len());
    for s in survivors {
        let text: String = s.tokens.concat();
        let ids = tokenize(&text, &vocab)?;
        if ids.contains(&UNK_ID) {
            stats.rejected_unknown_token += 1;
            continue;
        }
        rows.push(EncodedRow {
            token_ids: ids,
            props: s.props,
        });
    }
    stats.survivors = rows.len();

    if rows.is_empty() {
        return Err(Error::data("no rows survive preprocessing"));
    }
    Ok(PreprocessOutput {
        dataset: Dataset {
            condition_names: condition_names.to_vec(),
            rows,
        },
        vocab,
        stats,
    })
}

pub fn write_outputs(out_dir: &Path, output: &PreprocessOutput) -> Result<(), Error> {
    std::fs::create_dir_all(out_dir)?;
    output.dataset.save(&out_dir.join("dataset.bin"))?;
    output.vocab.save(&out_dir.join("vocab.txt"))?;
    std::fs::write(out_dir.join("stats.txt"), output.stats.report())?;
    Ok(())
}
