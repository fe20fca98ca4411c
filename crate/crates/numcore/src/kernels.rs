//! Row-level compute kernels shared by the recorded (tape) forward pass and
//! the incremental inference path.
//!
//! Keeping one implementation of each per-row computation is what makes the
//! KV-cache decoder bit-identical to a full re-forward: both paths call the
//! same functions with the same accumulation order.

use crate::scalar::Real;

/// `out[j] += sum_k row[k] * mat[k * n + j]` with `k` as the outer loop.
///
/// Per output element the additions happen in ascending `k`, so looping rows
/// over a full matrix product reproduces exactly the same sums as a single
/// row-vector product.
pub fn row_times_matrix<R: Real>(row: &[R], mat: &[R], k_dim: usize, n_dim: usize, out: &mut [R]) {
    debug_assert_eq!(row.len(), k_dim);
    debug_assert_eq!(mat.len(), k_dim * n_dim);
    debug_assert_eq!(out.len(), n_dim);
    for (k, &a) in row.iter().enumerate() {
        let mrow = &mat[k * n_dim..(k + 1) * n_dim];
        for (o, &m) in out.iter_mut().zip(mrow) {
            *o += a * m;
        }
    }
}

/// RMS normalization of one row: `out = x / sqrt(mean(x^2) + eps) * gain`.
/// Returns the reciprocal RMS for use in backward.
pub fn rmsnorm_row<R: Real>(x: &[R], gain: &[R], eps: R, out: &mut [R]) -> R {
    debug_assert_eq!(x.len(), gain.len());
    let mut sq = R::ZERO;
    for &v in x {
        sq += v * v;
    }
    let mean = sq / R::from_usize(x.len());
    let inv_rms = R::ONE / (mean + eps).sqrt();
    for ((o, &v), &g) in out.iter_mut().zip(x).zip(gain) {
        *o = v * inv_rms * g;
    }
    inv_rms
}

/// Frequency of rotary pair `i` out of `d/2`, computed in f64 on both paths.
pub fn rope_freq(pair: usize, d_head: usize, base: f64) -> f64 {
    base.powf(-2.0 * pair as f64 / d_head as f64)
}

/// Rotates consecutive pairs of one row by `pos * base^(-2i/d)`.
///
/// The sine/cosine are evaluated in f64 and then narrowed, so `f32` tensors
/// see identical rotations regardless of which code path runs them.
pub fn rope_row<R: Real>(x: &[R], pos: usize, base: f64, out: &mut [R]) {
    let d = x.len();
    debug_assert_eq!(d % 2, 0);
    for pair in 0..d / 2 {
        let angle = pos as f64 * rope_freq(pair, d, base);
        let (sin, cos) = (R::from_f64(angle.sin()), R::from_f64(angle.cos()));
        let (a, b) = (x[2 * pair], x[2 * pair + 1]);
        out[2 * pair] = a * cos - b * sin;
        out[2 * pair + 1] = a * sin + b * cos;
    }
}

/// SiLU (swish) activation: `x * sigmoid(x)`.
pub fn silu<R: Real>(x: R) -> R {
    x * sigmoid(x)
}

pub fn sigmoid<R: Real>(x: R) -> R {
    R::ONE / (R::ONE + (-x).exp())
}

/// One causal-attention output row.
///
/// `keys`/`vals` hold `ctx` rows. Scores are `dot(q, k_j) * inv_sqrt_dk` for
/// `j < ctx`; the softmax and the weighted value sum both run in ascending
/// `j`. `probs_out` receives the `ctx` attention weights.
pub fn causal_attn_row<R: Real>(
    q_row: &[R],
    keys: &[R],
    vals: &[R],
    ctx: usize,
    d_k: usize,
    d_v: usize,
    inv_sqrt_dk: R,
    probs_out: &mut [R],
    out: &mut [R],
) {
    debug_assert_eq!(q_row.len(), d_k);
    debug_assert!(keys.len() >= ctx * d_k);
    debug_assert!(vals.len() >= ctx * d_v);
    debug_assert!(probs_out.len() >= ctx);
    debug_assert_eq!(out.len(), d_v);

    let mut max = R::from_f64(f64::NEG_INFINITY);
    for j in 0..ctx {
        let krow = &keys[j * d_k..(j + 1) * d_k];
        let mut dot = R::ZERO;
        for (&a, &b) in q_row.iter().zip(krow) {
            dot += a * b;
        }
        let s = dot * inv_sqrt_dk;
        probs_out[j] = s;
        max = max.maximum(s);
    }
    let mut denom = R::ZERO;
    for p in probs_out.iter_mut().take(ctx) {
        *p = (*p - max).exp();
        denom += *p;
    }
    for p in probs_out.iter_mut().take(ctx) {
        *p = *p / denom;
    }
    out.iter_mut().for_each(|o| *o = R::ZERO);
    for j in 0..ctx {
        let p = probs_out[j];
        let vrow = &vals[j * d_v..(j + 1) * d_v];
        for (o, &v) in out.iter_mut().zip(vrow) {
            *o += p * v;
        }
    }
}

/// Numerically stable softmax of a logit slice into `out` (f64 accumulator
/// free: everything stays in `R`, matching the tensor op).
pub fn softmax_slice<R: Real>(logits: &[R], out: &mut [R]) {
    let mut max = R::from_f64(f64::NEG_INFINITY);
    for &v in logits {
        max = max.maximum(v);
    }
    let mut denom = R::ZERO;
    for (o, &v) in out.iter_mut().zip(logits) {
        *o = (v - max).exp();
        denom += *o;
    }
    for o in out.iter_mut() {
        *o = *o / denom;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_matmul_matches_manual() {
        // [1,2] * [[1,2],[3,4]] = [7,10]
        let mut out = vec![0.0f64; 2];
        row_times_matrix(&[1.0, 2.0], &[1.0, 2.0, 3.0, 4.0], 2, 2, &mut out);
        assert_eq!(out, vec![7.0, 10.0]);
    }

    #[test]
    fn rope_position_zero_is_identity() {
        let x = vec![0.3f64, -1.2, 2.0, 0.5];
        let mut out = vec![0.0; 4];
        rope_row(&x, 0, 10000.0, &mut out);
        assert_eq!(out, x);
    }

    #[test]
    fn rope_preserves_pair_norms() {
        let x = vec![0.3f64, -1.2, 2.0, 0.5, -0.1, 0.9];
        let mut out = vec![0.0; 6];
        rope_row(&x, 17, 10000.0, &mut out);
        for pair in 0..3 {
            let n0 = x[2 * pair].hypot(x[2 * pair + 1]);
            let n1 = out[2 * pair].hypot(out[2 * pair + 1]);
            assert!((n0 - n1).abs() < 1e-12);
        }
    }

    #[test]
    fn attn_row_single_context_is_value_row() {
        let q = [0.5f64, -0.25];
        let k = [1.0, 2.0];
        let v = [3.0, 4.0, 5.0];
        let mut probs = [0.0];
        let mut out = [0.0; 3];
        causal_attn_row(&q, &k, &v, 1, 2, 3, 1.0, &mut probs, &mut out);
        assert_eq!(probs[0], 1.0);
        assert_eq!(out, v);
    }
}
