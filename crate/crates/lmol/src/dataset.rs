//! Tokenized dataset storage and the train/test split.

use std::fs;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::Error;
use crate::rng;

/// One preprocessed molecule: raw SMILES token ids (no framing) plus its
/// property values in registered-condition order.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedRow {
    pub token_ids: Vec<u32>,
    pub props: Vec<f32>,
}

/// A preprocessed corpus bound to its condition columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub condition_names: Vec<String>,
    pub rows: Vec<EncodedRow>,
}

const MAGIC: &[u8; 4] = b"LMDS";
const VERSION: u32 = 1;

impl Dataset {
    pub fn save(&self, path: &Path) -> Result<(), Error> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.condition_names.len() as u32).to_le_bytes());
        for name in &self.condition_names {
            let bytes = name.as_bytes();
            buf.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
            buf.extend_from_slice(bytes);
        }
        buf.extend_from_slice(&(self.rows.len() as u32).to_le_bytes());
        for row in &self.rows {
            buf.extend_from_slice(&(row.token_ids.len() as u32).to_le_bytes());
            for &t in &row.token_ids {
                buf.extend_from_slice(&t.to_le_bytes());
            }
            for &p in &row.props {
                buf.extend_from_slice(&p.to_le_bytes());
            }
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, &buf)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let mut file = fs::File::open(path)?;
        let mut buf = Vec::new();
        file.read_to_end(&mut buf)?;
        let mut r = Reader { buf: &buf, pos: 0 };
        let magic = r.bytes(4)?;
        if magic != MAGIC {
            return Err(Error::format("not a dataset file (bad magic)"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::format(format!("unsupported dataset version {version}")));
        }
        let n_conds = r.u32()? as usize;
        let mut condition_names = Vec::with_capacity(n_conds);
        for _ in 0..n_conds {
            let len = r.u32()? as usize;
            let bytes = r.bytes(len)?;
            condition_names.push(
                String::from_utf8(bytes.to_vec())
                    .map_err(|_| Error::format("condition name is not UTF-8"))?,
            );
        }
        let n_rows = r.u32()? as usize;
        let mut rows = Vec::with_capacity(n_rows);
        for _ in 0..n_rows {
            let n_tok = r.u32()? as usize;
            let mut token_ids = Vec::with_capacity(n_tok);
            for _ in 0..n_tok {
                token_ids.push(r.u32()?);
            }
            let mut props = Vec::with_capacity(n_conds);
            for _ in 0..n_conds {
                props.push(f32::from_le_bytes(r.bytes(4)?.try_into().unwrap()));
            }
            rows.push(EncodedRow { token_ids, props });
        }
        Ok(Dataset {
            condition_names,
            rows,
        })
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn bytes(&mut self, n: usize) -> Result<&'a [u8], Error> {
        if self.pos + n > self.buf.len() {
            return Err(Error::format("truncated file"));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, Error> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }
}

/// Deterministic shuffle-and-split into disjoint, exhaustive train/test
/// parts. `ratio` is the train fraction.
pub fn split_dataset(
    rows: Vec<EncodedRow>,
    ratio: f64,
    seed: u64,
) -> Result<(Vec<EncodedRow>, Vec<EncodedRow>), Error> {
    if rows.len() < 2 {
        return Err(Error::data(format!(
            "need at least 2 rows to split, got {}",
            rows.len()
        )));
    }
    let mut indices: Vec<usize> = (0..rows.len()).collect();
    let mut rng = rng::derive(seed, rng::STREAM_EPOCH, u64::MAX);
    indices.shuffle(&mut rng);
    let cut = ((rows.len() as f64 * ratio).round() as usize).clamp(1, rows.len() - 1);
    let mut rows: Vec<Option<EncodedRow>> = rows.into_iter().map(Some).collect();
    let train = indices[..cut]
        .iter()
        .map(|&i| rows[i].take().unwrap())
        .collect();
    let test = indices[cut..]
        .iter()
        .map(|&i| rows[i].take().unwrap())
        .collect();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> Vec<EncodedRow> {
        (0..n)
            .map(|i| EncodedRow {
                token_ids: vec![i as u32, (i * 2) as u32],
                props: vec![i as f32 * 0.5],
            })
            .collect()
    }

    #[test]
    fn ninety_ten_split() {
        let (train, test) = split_dataset(rows(100), 0.9, 1).unwrap();
        assert_eq!(train.len(), 90);
        assert_eq!(test.len(), 10);
    }

    #[test]
    fn split_is_deterministic_and_exhaustive() {
        let (a_train, a_test) = split_dataset(rows(37), 0.9, 5).unwrap();
        let (b_train, b_test) = split_dataset(rows(37), 0.9, 5).unwrap();
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);
        let mut all: Vec<u32> = a_train
            .iter()
            .chain(&a_test)
            .map(|r| r.token_ids[0])
            .collect();
        all.sort();
        assert_eq!(all, (0..37).collect::<Vec<_>>());
    }

    #[test]
    fn empty_split_is_a_data_error() {
        assert!(split_dataset(Vec::new(), 0.9, 0).is_err());
        assert!(split_dataset(rows(1), 0.9, 0).is_err());
    }

    #[test]
    fn dataset_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.bin");
        let ds = Dataset {
            condition_names: vec!["mol_weight_scaled".into()],
            rows: rows(10),
        };
        ds.save(&path).unwrap();
        let loaded = Dataset::load(&path).unwrap();
        assert_eq!(loaded, ds);
    }

    #[test]
    fn truncated_dataset_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.bin");
        let ds = Dataset {
            condition_names: vec!["x".into()],
            rows: rows(4),
        };
        ds.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(Dataset::load(&path).is_err());
    }
}
