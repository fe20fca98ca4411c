//! Checkpoint serialization.
//!
//! Layout: magic `LMOL`, u32 format version, u32 config-field count, the
//! config fields as u32, u32 tensor count, then per tensor a u32 name
//! length, the name bytes, u32 rank, u32 dims, and the little-endian f32
//! payload. Optimizer moments ride along as `adam.m.*` / `adam.v.*`
//! tensors. Writes are atomic (temp file + rename).

use std::fs;
use std::io::Read;
use std::path::Path;

use numcore::AdamState;

use crate::config::ModelConfig;
use crate::error::Error;
use crate::params::ModelParams;

const MAGIC: &[u8; 4] = b"LMOL";
const VERSION: u32 = 1;
const N_CONFIG: u32 = 16;

pub struct Checkpoint {
    pub params: ModelParams<f32>,
    pub step: u64,
    pub seed: u64,
    /// `(m, v, t)` in [`ModelParams::all`] order, when saved with state.
    pub adam: Option<(Vec<Vec<f32>>, Vec<Vec<f32>>, u64)>,
}

pub fn save_checkpoint(
    path: &Path,
    params: &ModelParams<f32>,
    adam: Option<&AdamState<f32>>,
    step: u64,
    seed: u64,
) -> Result<(), Error> {
    let cfg = &params.config;
    let adam_t = adam.map_or(0, |a| a.t);
    let config_fields: [u32; N_CONFIG as usize] = [
        cfg.d_emb as u32,
        cfg.n_heads as u32,
        cfg.n_layers as u32,
        cfg.d_ffn as u32,
        cfg.d_voc as u32,
        cfg.max_seq_len as u32,
        cfg.n_numeric_conditions as u32,
        cfg.fragment_cap as u32,
        cfg.rope_base,
        (cfg.dropout_p * 1e6) as u32,
        (step & 0xffff_ffff) as u32,
        (step >> 32) as u32,
        (seed & 0xffff_ffff) as u32,
        (seed >> 32) as u32,
        adam.is_some() as u32,
        adam_t as u32,
    ];

    let mut tensors: Vec<(String, Vec<usize>, Vec<f32>)> = params
        .named()
        .into_iter()
        .map(|(name, t)| (name, t.shape(), t.to_vec()))
        .collect();
    if let Some(state) = adam {
        let (m, v) = state.moments();
        for ((name, t), (m_buf, v_buf)) in params.named().into_iter().zip(m.iter().zip(v)) {
            tensors.push((format!("adam.m.{name}"), t.shape(), m_buf.clone()));
            tensors.push((format!("adam.v.{name}"), t.shape(), v_buf.clone()));
        }
    }

    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&N_CONFIG.to_le_bytes());
    for f in config_fields {
        buf.extend_from_slice(&f.to_le_bytes());
    }
    buf.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (name, shape, data) in &tensors {
        let name_bytes = name.as_bytes();
        buf.extend_from_slice(&(name_bytes.len() as u32).to_le_bytes());
        buf.extend_from_slice(name_bytes);
        buf.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for &d in shape {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }

    let tmp = path.with_extension("ckpt.tmp");
    fs::write(&tmp, &buf)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, Error> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    let mut r = Reader { buf: &buf, pos: 0 };
    if r.bytes(4)? != MAGIC {
        return Err(Error::format("not a checkpoint (bad magic)"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::format(format!("unsupported checkpoint version {version}")));
    }
    let n_config = r.u32()?;
    if n_config != N_CONFIG {
        return Err(Error::format(format!("unexpected config field count {n_config}")));
    }
    let mut fields = [0u32; N_CONFIG as usize];
    for f in fields.iter_mut() {
        *f = r.u32()?;
    }
    let config = ModelConfig {
        d_emb: fields[0] as usize,
        n_heads: fields[1] as usize,
        n_layers: fields[2] as usize,
        d_ffn: fields[3] as usize,
        d_voc: fields[4] as usize,
        max_seq_len: fields[5] as usize,
        n_numeric_conditions: fields[6] as usize,
        fragment_cap: fields[7] as usize,
        rope_base: fields[8],
        dropout_p: fields[9] as f32 / 1e6,
    };
    let step = fields[10] as u64 | ((fields[11] as u64) << 32);
    let seed = fields[12] as u64 | ((fields[13] as u64) << 32);
    let has_adam = fields[14] != 0;
    let adam_t = fields[15] as u64;

    let n_tensors = r.u32()? as usize;
    let mut tensors: Vec<(String, Vec<usize>, Vec<f32>)> = Vec::with_capacity(n_tensors);
    for _ in 0..n_tensors {
        let name_len = r.u32()? as usize;
        let name = String::from_utf8(r.bytes(name_len)?.to_vec())
            .map_err(|_| Error::format("tensor name is not UTF-8"))?;
        let rank = r.u32()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32()? as usize);
        }
        let numel: usize = shape.iter().product();
        let mut data = Vec::with_capacity(numel);
        for _ in 0..numel {
            data.push(f32::from_le_bytes(r.bytes(4)?.try_into().unwrap()));
        }
        tensors.push((name, shape, data));
    }
    if r.pos != buf.len() {
        return Err(Error::format("trailing bytes after tensor directory"));
    }

    // Condition names are recoverable from the tensor names
    // (`cond<i>.<name>.w`).
    let mut condition_names = vec![String::new(); config.n_numeric_conditions];
    for (name, _, _) in &tensors {
        if let Some(rest) = name.strip_prefix("cond") {
            if let Some((idx_str, tail)) = rest.split_once('.') {
                if let (Ok(idx), Some(col)) = (idx_str.parse::<usize>(), tail.strip_suffix(".w")) {
                    if idx < condition_names.len() {
                        condition_names[idx] = col.to_string();
                    }
                }
            }
        }
    }
    if condition_names.iter().any(String::is_empty) {
        return Err(Error::format("checkpoint is missing condition projections"));
    }

    let params = ModelParams::<f32>::zeroed(config, &condition_names)?;
    let named = params.named();
    for (name, tensor) in &named {
        let (_, shape, data) = tensors
            .iter()
            .find(|(n, _, _)| n == name)
            .ok_or_else(|| Error::format(format!("checkpoint is missing tensor {name}")))?;
        if *shape != tensor.shape() {
            return Err(Error::format(format!(
                "tensor {name} has shape {shape:?}, expected {:?}",
                tensor.shape()
            )));
        }
        tensor.set_data(data);
    }

    let adam = if has_adam {
        let mut m = Vec::with_capacity(named.len());
        let mut v = Vec::with_capacity(named.len());
        for (name, tensor) in &named {
            for (prefix, sink) in [("adam.m.", &mut m), ("adam.v.", &mut v)] {
                let full = format!("{prefix}{name}");
                let (_, shape, data) = tensors
                    .iter()
                    .find(|(n, _, _)| *n == full)
                    .ok_or_else(|| Error::format(format!("missing optimizer tensor {full}")))?;
                if *shape != tensor.shape() {
                    return Err(Error::format(format!("optimizer tensor {full} shape mismatch")));
                }
                sink.push(data.clone());
            }
        }
        Some((m, v, adam_t))
    } else {
        None
    };

    Ok(Checkpoint {
        params,
        step,
        seed,
        adam,
    })
}

/// Loads and additionally insists the stored architecture matches
/// `expected`.
pub fn load_checkpoint_expecting(
    path: &Path,
    expected: &ModelConfig,
) -> Result<Checkpoint, Error> {
    let ckpt = load_checkpoint(path)?;
    if ckpt.params.config != *expected {
        return Err(Error::format(format!(
            "checkpoint config {:?} does not match expected {:?}",
            ckpt.params.config, expected
        )));
    }
    Ok(ckpt)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn bytes(&mut self, n: usize) -> Result<&'a [u8], Error> {
        if self.pos + n > self.buf.len() {
            return Err(Error::format("truncated checkpoint"));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, Error> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use crate::rng;

    fn small_params(seed: u64) -> ModelParams<f32> {
        ModelParams::init(
            ModelConfig::desk(18, 1),
            &["mol_weight_scaled".into()],
            &mut rng::derive(seed, rng::STREAM_INIT, 0),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let params = small_params(1);
        save_checkpoint(&path, &params, None, 123, 77).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.step, 123);
        assert_eq!(loaded.seed, 77);
        assert_eq!(loaded.params.condition_names(), vec!["mol_weight_scaled"]);
        for ((_, a), (_, b)) in params.named().iter().zip(loaded.params.named()) {
            let (da, db) = (a.to_vec(), b.to_vec());
            assert_eq!(da.len(), db.len());
            for (x, y) in da.iter().zip(db) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn truncated_file_fails_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let params = small_params(2);
        save_checkpoint(&path, &params, None, 0, 0).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Format(_))));
    }

    #[test]
    fn bad_magic_fails() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        fs::write(&path, b"NOPE....").unwrap();
        assert!(load_checkpoint(&path).is_err());
    }

    #[test]
    fn config_mismatch_is_a_shape_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let params = small_params(3);
        save_checkpoint(&path, &params, None, 0, 0).unwrap();
        let mut other = ModelConfig::desk(18, 1);
        other.d_emb = 32;
        assert!(load_checkpoint_expecting(&path, &other).is_err());
    }

    #[test]
    fn optimizer_state_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let params = small_params(4);
        let all = params.all();
        let mut adam = AdamState::new(&all, 1e-3, 0.9, 0.95, 1e-8);
        // Take one non-trivial step so the moments are nonzero.
        for t in &all {
            t.accumulate_grad(&vec![0.01; t.numel()]);
        }
        adam.step(&all).unwrap();
        save_checkpoint(&path, &params, Some(&adam), 1, 0).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        let (m, v, t) = loaded.adam.unwrap();
        assert_eq!(t, 1);
        let (em, ev) = adam.moments();
        assert_eq!(m, em.to_vec());
        assert_eq!(v, ev.to_vec());
    }
}
