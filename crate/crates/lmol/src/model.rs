//! The decoder-only transformer forward pass over tape ops.

use numcore::{Real, Tape, Tensor};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::params::{LayerParams, ModelParams};

/// RMSNorm epsilon.
pub const NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Runs the full decoder stack: for each layer a pre-normalized masked
/// multi-head attention sublayer and a pre-normalized SwiGLU feed-forward
/// sublayer, both with residual connections; then the final RMSNorm and the
/// vocabulary projection. Rotary positions cover the whole assembled
/// sequence, context included. Dropout applies to feed-forward outputs in
/// training mode only.
pub fn forward<R: Real>(
    tape: &Tape<R>,
    params: &ModelParams<R>,
    input: &Tensor<R>,
    positions: &[usize],
    mode: Mode,
    mut dropout_rng: Option<&mut ChaCha8Rng>,
) -> Result<Tensor<R>, Error> {
    let shape = input.shape();
    if shape.len() != 2 || shape[1] != params.config.d_emb {
        return Err(Error::length(format!(
            "input shape {shape:?} does not match d_emb {}",
            params.config.d_emb
        )));
    }
    let total = shape[0];
    if total > params.config.max_seq_len + params.config.n_numeric_conditions + params.config.fragment_cap + 2
    {
        return Err(Error::length(format!(
            "sequence of {total} rows exceeds the model limit"
        )));
    }
    if positions.len() != total {
        return Err(Error::length("one position per input row required"));
    }

    let mut x = input.clone();
    for layer in &params.layers {
        x = decoder_block(tape, params, layer, &x, positions, mode, &mut dropout_rng)?;
    }
    let eps = R::from_f64(NORM_EPS);
    let normed = tape.rmsnorm(&x, &params.final_norm, eps)?;
    Ok(tape.matmul(&normed, &params.out_proj)?)
}

fn decoder_block<R: Real>(
    tape: &Tape<R>,
    params: &ModelParams<R>,
    layer: &LayerParams<R>,
    x: &Tensor<R>,
    positions: &[usize],
    mode: Mode,
    dropout_rng: &mut Option<&mut ChaCha8Rng>,
) -> Result<Tensor<R>, Error> {
    let cfg = &params.config;
    let eps = R::from_f64(NORM_EPS);
    let d_head = cfg.d_head();
    let base = cfg.rope_base as f64;

    // x + MMHA(RMSNorm(x))
    let normed = tape.rmsnorm(x, &layer.norm_attn, eps)?;
    let q = tape.matmul(&normed, &layer.w_q)?;
    let k = tape.matmul(&normed, &layer.w_k)?;
    let v = tape.matmul(&normed, &layer.w_v)?;
    let mut heads = Vec::with_capacity(cfg.n_heads);
    for h in 0..cfg.n_heads {
        let qh = tape.slice_cols(&q, h * d_head, d_head)?;
        let kh = tape.slice_cols(&k, h * d_head, d_head)?;
        let vh = tape.slice_cols(&v, h * d_head, d_head)?;
        let qh = tape.rope(&qh, positions, base)?;
        let kh = tape.rope(&kh, positions, base)?;
        heads.push(tape.causal_attention(&qh, &kh, &vh)?);
    }
    let concat = tape.concat_cols(&heads)?;
    let attn = tape.matmul(&concat, &layer.w_o)?;
    let x = tape.add(x, &attn)?;

    // y + Dropout(FFN(RMSNorm(y)))
    let normed = tape.rmsnorm(&x, &layer.norm_ffn, eps)?;
    let gate = tape.silu(&tape.matmul(&normed, &layer.w1)?);
    let up = tape.matmul(&normed, &layer.w3)?;
    let gated = tape.mul(&gate, &up)?;
    let mut ffn = tape.matmul(&gated, &layer.w2)?;
    if mode == Mode::Train && cfg.dropout_p > 0.0 {
        let rng = dropout_rng
            .as_deref_mut()
            .expect("training mode requires a dropout rng");
        let keep_prob = 1.0 - cfg.dropout_p as f64;
        let keep: Vec<bool> = (0..ffn.numel())
            .map(|_| rng.random::<f64>() < keep_prob)
            .collect();
        ffn = tape.dropout_masked(&ffn, keep, R::from_f64(keep_prob))?;
    }
    Ok(tape.add(&x, &ffn)?)
}
