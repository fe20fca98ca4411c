//! Incremental inference with a per-sequence KV cache.
//!
//! Every row-level computation calls the same `numcore::kernels` functions
//! as the recorded forward pass, in the same order, so decoding one row at a
//! time against the cache is bit-identical to re-running the whole sequence.

use numcore::{kernels, Real};

use crate::context::{ContextSpec, FragmentCondition, NumericCondition};
use crate::error::Error;
use crate::model::NORM_EPS;
use crate::params::ModelParams;

/// Grown key/value history for one layer, all heads side by side.
struct LayerCache<R> {
    /// `len × d_emb`, head h occupying columns `h*d_head..(h+1)*d_head`,
    /// keys already rotated.
    keys: Vec<R>,
    values: Vec<R>,
}

/// Decoding state for one sequence.
pub struct DecodeState<R: Real> {
    layers: Vec<LayerCache<R>>,
    len: usize,
}

/// Attention weights recorded by a traced step: `[layer][head][ctx]`.
pub type StepTrace<R> = Vec<Vec<Vec<R>>>;

impl<R: Real> DecodeState<R> {
    pub fn new(params: &ModelParams<R>) -> Self {
        DecodeState {
            layers: (0..params.config.n_layers)
                .map(|_| LayerCache {
                    keys: Vec::new(),
                    values: Vec::new(),
                })
                .collect(),
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Feeds one embedding row at `pos`, returning its vocabulary logits.
    pub fn append_row(&mut self, params: &ModelParams<R>, row: &[R], pos: usize) -> Vec<R> {
        self.step(params, row, pos, None)
    }

    /// Like [`DecodeState::append_row`] but also records each head's
    /// attention weights over the context so far.
    pub fn append_row_traced(
        &mut self,
        params: &ModelParams<R>,
        row: &[R],
        pos: usize,
        trace: &mut StepTrace<R>,
    ) -> Vec<R> {
        self.step(params, row, pos, Some(trace))
    }

    fn step(
        &mut self,
        params: &ModelParams<R>,
        row: &[R],
        pos: usize,
        mut trace: Option<&mut StepTrace<R>>,
    ) -> Vec<R> {
        let cfg = &params.config;
        let d = cfg.d_emb;
        let d_head = cfg.d_head();
        let base = cfg.rope_base as f64;
        let eps = R::from_f64(NORM_EPS);
        let inv_sqrt_dk = R::ONE / R::from_usize(d_head).sqrt();
        debug_assert_eq!(row.len(), d);

        let ctx = self.len + 1;
        let mut x = row.to_vec();
        let mut normed = vec![R::ZERO; d];
        let mut q = vec![R::ZERO; d];
        let mut attn_cat = vec![R::ZERO; d];
        let mut rotated = vec![R::ZERO; d_head];
        let mut probs = vec![R::ZERO; ctx];

        if let Some(t) = trace.as_mut() {
            t.clear();
        }

        for (li, layer) in params.layers.iter().enumerate() {
            let cache = &mut self.layers[li];

            // x + MMHA(RMSNorm(x))
            kernels::rmsnorm_row(&x, &layer.norm_attn.data(), eps, &mut normed);
            q.iter_mut().for_each(|v| *v = R::ZERO);
            kernels::row_times_matrix(&normed, &layer.w_q.data(), d, d, &mut q);
            let mut k_new = vec![R::ZERO; d];
            kernels::row_times_matrix(&normed, &layer.w_k.data(), d, d, &mut k_new);
            let mut v_new = vec![R::ZERO; d];
            kernels::row_times_matrix(&normed, &layer.w_v.data(), d, d, &mut v_new);

            // Rotate the new key per head before caching, mirroring the
            // recorded path where RoPE applies to the sliced head columns.
            let mut k_row = vec![R::ZERO; d];
            for h in 0..cfg.n_heads {
                kernels::rope_row(&k_new[h * d_head..(h + 1) * d_head], pos, base, &mut rotated);
                k_row[h * d_head..(h + 1) * d_head].copy_from_slice(&rotated);
            }
            cache.keys.extend_from_slice(&k_row);
            cache.values.extend_from_slice(&v_new);

            let mut layer_trace = trace.as_ref().map(|_| Vec::with_capacity(cfg.n_heads));
            for h in 0..cfg.n_heads {
                kernels::rope_row(&q[h * d_head..(h + 1) * d_head], pos, base, &mut rotated);
                // Per-head views into the cached rows.
                let keys_h = gather_head(&cache.keys, ctx, d, h * d_head, d_head);
                let vals_h = gather_head(&cache.values, ctx, d, h * d_head, d_head);
                let out_h = &mut attn_cat[h * d_head..(h + 1) * d_head];
                kernels::causal_attn_row(
                    &rotated,
                    &keys_h,
                    &vals_h,
                    ctx,
                    d_head,
                    d_head,
                    inv_sqrt_dk,
                    &mut probs,
                    out_h,
                );
                if let Some(lt) = layer_trace.as_mut() {
                    lt.push(probs[..ctx].to_vec());
                }
            }
            if let (Some(t), Some(lt)) = (trace.as_mut(), layer_trace) {
                t.push(lt);
            }
            let mut attn_out = vec![R::ZERO; d];
            kernels::row_times_matrix(&attn_cat, &layer.w_o.data(), d, d, &mut attn_out);
            for (xi, a) in x.iter_mut().zip(&attn_out) {
                *xi = *xi + *a;
            }

            // y + FFN(RMSNorm(y)); dropout is inference-off.
            kernels::rmsnorm_row(&x, &layer.norm_ffn.data(), eps, &mut normed);
            let mut gate = vec![R::ZERO; cfg.d_ffn];
            kernels::row_times_matrix(&normed, &layer.w1.data(), d, cfg.d_ffn, &mut gate);
            gate.iter_mut().for_each(|g| *g = kernels::silu(*g));
            let mut up = vec![R::ZERO; cfg.d_ffn];
            kernels::row_times_matrix(&normed, &layer.w3.data(), d, cfg.d_ffn, &mut up);
            for (g, u) in gate.iter_mut().zip(&up) {
                *g = *g * *u;
            }
            let mut ffn = vec![R::ZERO; d];
            kernels::row_times_matrix(&gate, &layer.w2.data(), cfg.d_ffn, d, &mut ffn);
            for (xi, f) in x.iter_mut().zip(&ffn) {
                *xi = *xi + *f;
            }
        }

        self.len += 1;
        kernels::rmsnorm_row(&x, &params.final_norm.data(), eps, &mut normed);
        let mut logits = vec![R::ZERO; cfg.d_voc];
        kernels::row_times_matrix(&normed, &params.out_proj.data(), d, cfg.d_voc, &mut logits);
        logits
    }
}

fn gather_head<R: Real>(
    rows: &[R],
    n_rows: usize,
    row_width: usize,
    start: usize,
    width: usize,
) -> Vec<R> {
    let mut out = Vec::with_capacity(n_rows * width);
    for r in 0..n_rows {
        out.extend_from_slice(&rows[r * row_width + start..r * row_width + start + width]);
    }
    out
}

/// Context rows for inference: same arithmetic, same order as the recorded
/// encoders in `context`.
pub fn context_rows<R: Real>(
    params: &ModelParams<R>,
    spec: &ContextSpec,
) -> Result<Vec<Vec<R>>, Error> {
    let mut rows = Vec::with_capacity(spec.context_len());
    for c in &spec.numeric {
        rows.push(numeric_row(params, c)?);
    }
    if let Some(f) = &spec.fragment {
        rows.extend(fragment_rows(params, f)?);
    }
    Ok(rows)
}

fn numeric_row<R: Real>(
    params: &ModelParams<R>,
    c: &NumericCondition,
) -> Result<Vec<R>, Error> {
    let p = params
        .cond
        .numeric
        .get(c.property_id)
        .ok_or_else(|| Error::config(format!("unknown property id {}", c.property_id)))?;
    let v = R::from_f64(c.value);
    let (w, b, tau) = (p.w.data(), p.b.data(), p.tau.data());
    Ok((0..w.len()).map(|i| w[i] * v + b[i] + tau[i]).collect())
}

fn fragment_rows<R: Real>(
    params: &ModelParams<R>,
    f: &FragmentCondition,
) -> Result<Vec<Vec<R>>, Error> {
    if f.len() > params.config.fragment_cap {
        return Err(Error::length("fragment exceeds cap"));
    }
    let d = params.config.d_emb;
    let (tok, frag, label) = (
        params.tok_emb.data(),
        params.cond.frag_emb.data(),
        params.cond.frag_label.data(),
    );
    f.token_ids
        .iter()
        .map(|&id| {
            if id as usize >= params.config.d_voc {
                return Err(Error::config(format!("fragment token id {id} out of range")));
            }
            let o = id as usize * d;
            Ok((0..d).map(|i| tok[o + i] + frag[o + i] + label[i]).collect())
        })
        .collect()
}

/// Embedding row for one token id.
pub fn token_row<R: Real>(params: &ModelParams<R>, id: u32) -> Result<Vec<R>, Error> {
    let d = params.config.d_emb;
    if id as usize >= params.config.d_voc {
        return Err(Error::config(format!("token id {id} out of range")));
    }
    let tok = params.tok_emb.data();
    Ok(tok[id as usize * d..(id as usize + 1) * d].to_vec())
}

/// Whole-sequence forward through the incremental path; returns logits for
/// every row.
pub fn full_forward<R: Real>(
    params: &ModelParams<R>,
    rows: &[Vec<R>],
    positions: &[usize],
) -> Vec<Vec<R>> {
    let mut state = DecodeState::new(params);
    rows.iter()
        .zip(positions)
        .map(|(row, &pos)| state.append_row(params, row, pos))
        .collect()
}

/// Whole-sequence forward capturing every attention matrix:
/// `[layer][head]` of `total × total` row-major weights, exact zeros above
/// the diagonal.
pub fn attention_trace<R: Real>(
    params: &ModelParams<R>,
    rows: &[Vec<R>],
    positions: &[usize],
) -> Vec<Vec<Vec<R>>> {
    let cfg = &params.config;
    let total = rows.len();
    let mut matrices =
        vec![vec![vec![R::ZERO; total * total]; cfg.n_heads]; cfg.n_layers];
    let mut state = DecodeState::new(params);
    let mut step_trace: StepTrace<R> = Vec::new();
    for (i, (row, &pos)) in rows.iter().zip(positions).enumerate() {
        let _ = state.append_row_traced(params, row, pos, &mut step_trace);
        for (li, layer) in step_trace.iter().enumerate() {
            for (hi, weights) in layer.iter().enumerate() {
                matrices[li][hi][i * total..i * total + weights.len()]
                    .copy_from_slice(weights);
            }
        }
    }
    matrices
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use crate::context::{assemble_input, ContextSpec};
    use crate::model::{forward, Mode};
    use crate::rng;
    use numcore::Tape;
    use smiles::{CLS_ID, SEP_ID};

    fn params(seed: u64) -> ModelParams<f32> {
        let config = ModelConfig {
            d_emb: 16,
            n_heads: 2,
            n_layers: 2,
            d_ffn: 24,
            d_voc: 14,
            max_seq_len: 64,
            dropout_p: 0.0,
            n_numeric_conditions: 1,
            fragment_cap: 50,
            rope_base: 10000,
        };
        ModelParams::init(config, &["w".into()], &mut rng::derive(seed, rng::STREAM_INIT, 0))
            .unwrap()
    }

    #[test]
    fn incremental_path_is_bit_identical_to_recorded_path() {
        let params = params(21);
        let spec = ContextSpec::new(
            vec![NumericCondition { property_id: 0, value: 1.2 }],
            Some(FragmentCondition::new(vec![4, 7, 9], 50).unwrap()),
        )
        .unwrap();
        let ids = vec![CLS_ID, 4, 7, 9, 5, SEP_ID];

        let tape = Tape::eval();
        let a = assemble_input(&tape, &spec, &ids, &params).unwrap();
        let recorded = forward(&tape, &params, &a.input, &a.positions, Mode::Eval, None).unwrap();

        let mut rows = context_rows(&params, &spec).unwrap();
        for &id in &ids {
            rows.push(token_row(&params, id).unwrap());
        }
        let incremental = full_forward(&params, &rows, &a.positions);

        let rec = recorded.to_vec();
        let vocab = params.config.d_voc;
        for (i, inc_row) in incremental.iter().enumerate() {
            for (j, &v) in inc_row.iter().enumerate() {
                let r = rec[i * vocab + j];
                assert_eq!(
                    v.to_bits(),
                    r.to_bits(),
                    "logit ({i},{j}) differs: {v} vs {r}"
                );
            }
        }
    }

    #[test]
    fn context_rows_match_assembled_input_bitwise() {
        let params = params(22);
        let spec = ContextSpec::new(
            vec![NumericCondition { property_id: 0, value: -0.4 }],
            Some(FragmentCondition::new(vec![6, 6], 50).unwrap()),
        )
        .unwrap();
        let ids = vec![CLS_ID, 6, SEP_ID];
        let tape = Tape::eval();
        let a = assemble_input(&tape, &spec, &ids, &params).unwrap();
        let assembled = a.input.to_vec();

        let mut rows = context_rows(&params, &spec).unwrap();
        for &id in &ids {
            rows.push(token_row(&params, id).unwrap());
        }
        let d = params.config.d_emb;
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                assert_eq!(v.to_bits(), assembled[r * d + c].to_bits());
            }
        }
    }

    #[test]
    fn trace_has_exact_zeros_above_diagonal() {
        let params = params(23);
        let ids = vec![CLS_ID, 4, 5, 6, SEP_ID];
        let rows: Vec<Vec<f32>> = ids
            .iter()
            .map(|&id| token_row(&params, id).unwrap())
            .collect();
        let positions: Vec<usize> = (0..rows.len()).collect();
        let trace = attention_trace(&params, &rows, &positions);
        assert_eq!(trace.len(), 2);
        let total = rows.len();
        for layer in &trace {
            assert_eq!(layer.len(), 2);
            for mat in layer {
                for i in 0..total {
                    for j in (i + 1)..total {
                        assert_eq!(mat[i * total + j], 0.0);
                    }
                    let sum: f32 = mat[i * total..i * total + i + 1].iter().sum();
                    assert!((sum - 1.0).abs() < 1e-5);
                }
            }
        }
    }
}
