//! SMILES handling: tokenization against a frozen vocabulary, parsing to
//! molecular graphs, valence-based validity checking, descriptor
//! computation, and bond-order-stripped substructure matching.
//!
//! All operations are pure functions over immutable inputs.

pub mod curated;
pub mod descriptors;
pub mod elements;
pub mod error;
pub mod graph;
pub mod matcher;
pub mod parser;
pub mod pattern;
pub mod tokenizer;
pub mod valence;
pub mod vocab;

pub use descriptors::{descriptors, molecular_weight, Descriptors};
pub use error::SmilesError;
pub use graph::{Atom, Bond, BondOrder, MolGraph};
pub use matcher::{brute_force_match, substructure_match};
pub use parser::parse;
pub use pattern::{to_pattern, Pattern};
pub use tokenizer::{detokenize, tokenize, tokenize_text};
pub use valence::{validate, Verdict};
pub use vocab::{Vocabulary, CLS_ID, PAD_ID, SEP_ID, UNK_ID};
