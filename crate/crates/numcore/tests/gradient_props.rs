//! Property tests: every recorded op's analytic gradient must match central
//! finite differences, plus algebraic invariants of the forward math.

use numcore::{gradcheck, AdamState, Tape, Tensor};
use proptest::prelude::*;

const EPS: f64 = 1e-5;
const TOL: f64 = 1e-4;

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0..2.0f64, n)
}

fn dim() -> impl Strategy<Value = usize> {
    1..=8usize
}

fn even_dim() -> impl Strategy<Value = usize> {
    (1..=4usize).prop_map(|d| d * 2)
}

fn param(shape: Vec<usize>, data: Vec<f64>) -> Tensor<f64> {
    Tensor::param(shape, data)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matmul_gradients((m, k, n) in (dim(), dim(), dim()),
                        seed_a in values(64), seed_b in values(64)) {
        let a = param(vec![m, k], seed_a[..m * k].to_vec());
        let b = param(vec![k, n], seed_b[..k * n].to_vec());
        let err = gradcheck(|tape| {
            let y = tape.matmul(&a, &b).unwrap();
            tape.sum_all(&y)
        }, &[a.clone(), b.clone()], EPS);
        prop_assert!(err < TOL, "matmul err {err}");
    }

    #[test]
    fn batched_matmul_gradients((bt, m, k, n) in (1..=3usize, 1..=4usize, 1..=4usize, 1..=4usize),
                                seed_a in values(192), seed_b in values(192)) {
        let a = param(vec![bt, m, k], seed_a[..bt * m * k].to_vec());
        let b = param(vec![bt, k, n], seed_b[..bt * k * n].to_vec());
        let err = gradcheck(|tape| {
            let y = tape.matmul(&a, &b).unwrap();
            tape.sum_all(&y)
        }, &[a.clone(), b.clone()], EPS);
        prop_assert!(err < TOL, "batched matmul err {err}");
    }

    #[test]
    fn softmax_gradients((rows, cols) in (dim(), dim()), seed in values(64), w in values(64)) {
        let x = param(vec![rows, cols], seed[..rows * cols].to_vec());
        // Weighted sum so the softmax gradient is not trivially zero.
        let weights = Tensor::from_vec(vec![rows, cols], w[..rows * cols].to_vec());
        let err = gradcheck(|tape| {
            let y = tape.softmax_rows(&x).unwrap();
            let wy = tape.mul(&y, &weights).unwrap();
            tape.sum_all(&wy)
        }, std::slice::from_ref(&x), EPS);
        prop_assert!(err < TOL, "softmax err {err}");
    }

    #[test]
    fn softmax_rows_sum_to_one((rows, cols) in (dim(), dim()), seed in values(64)) {
        let x = Tensor::from_vec(vec![rows, cols], seed[..rows * cols].to_vec());
        let y = Tape::eval().softmax_rows(&x).unwrap();
        let data = y.to_vec();
        for r in 0..rows {
            let sum: f64 = data[r * cols..(r + 1) * cols].iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-6);
            prop_assert!(data[r * cols..(r + 1) * cols].iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn cross_entropy_gradients((rows, vocab) in (dim(), 2..=8usize),
                               seed in values(64), targets in values(8)) {
        let logits = param(vec![rows, vocab], seed[..rows * vocab].to_vec());
        let ids: Vec<u32> = (0..rows)
            .map(|r| ((targets[r].abs() * 1000.0) as u32) % vocab as u32)
            .collect();
        let err = gradcheck(|tape| {
            tape.cross_entropy(&logits, &ids, u32::MAX).unwrap().loss
        }, std::slice::from_ref(&logits), EPS);
        prop_assert!(err < TOL, "cross_entropy err {err}");
    }

    #[test]
    fn cross_entropy_nonnegative((rows, vocab) in (dim(), 2..=8usize), seed in values(64)) {
        let logits = Tensor::from_vec(vec![rows, vocab], seed[..rows * vocab].to_vec());
        let ids: Vec<u32> = (0..rows).map(|r| (r % vocab) as u32).collect();
        let out = Tape::<f64>::eval().cross_entropy(&logits, &ids, u32::MAX).unwrap();
        prop_assert!(out.loss.item() >= 0.0);
    }

    #[test]
    fn rmsnorm_gradients((rows, cols) in (dim(), dim()), seed in values(64), g in values(8)) {
        let x = param(vec![rows, cols], seed[..rows * cols].to_vec());
        let gain = param(vec![cols], g[..cols].to_vec());
        let err = gradcheck(|tape| {
            let y = tape.rmsnorm(&x, &gain, 1e-5).unwrap();
            let sq = tape.mul(&y, &y).unwrap();
            tape.sum_all(&sq)
        }, &[x.clone(), gain.clone()], EPS);
        prop_assert!(err < TOL, "rmsnorm err {err}");
    }

    #[test]
    fn rope_gradients((rows, cols) in (dim(), even_dim()), seed in values(64), w in values(64)) {
        let x = param(vec![rows, cols], seed[..rows * cols].to_vec());
        let weights = Tensor::from_vec(vec![rows, cols], w[..rows * cols].to_vec());
        let positions: Vec<usize> = (0..rows).map(|r| r * 3 + 1).collect();
        let err = gradcheck(|tape| {
            let y = tape.rope(&x, &positions, 10000.0).unwrap();
            let wy = tape.mul(&y, &weights).unwrap();
            tape.sum_all(&wy)
        }, std::slice::from_ref(&x), EPS);
        prop_assert!(err < TOL, "rope err {err}");
    }

    #[test]
    fn causal_attention_gradients((len, dk, dv) in (1..=5usize, 1..=4usize, 1..=4usize),
                                  sq in values(20), sk in values(20), sv in values(20),
                                  w in values(20)) {
        let q = param(vec![len, dk], sq[..len * dk].to_vec());
        let k = param(vec![len, dk], sk[..len * dk].to_vec());
        let v = param(vec![len, dv], sv[..len * dv].to_vec());
        let weights = Tensor::from_vec(vec![len, dv], w[..len * dv].to_vec());
        let err = gradcheck(|tape| {
            let y = tape.causal_attention(&q, &k, &v).unwrap();
            let wy = tape.mul(&y, &weights).unwrap();
            tape.sum_all(&wy)
        }, &[q.clone(), k.clone(), v.clone()], EPS);
        prop_assert!(err < TOL, "attention err {err}");
    }

    #[test]
    fn silu_mul_add_scale_gradients(n in dim(), sa in values(8), sb in values(8)) {
        let a = param(vec![n], sa[..n].to_vec());
        let b = param(vec![n], sb[..n].to_vec());
        let err = gradcheck(|tape| {
            let s = tape.silu(&a);
            let m = tape.mul(&s, &b).unwrap();
            let sum = tape.add(&m, &a).unwrap();
            let scaled = tape.scale(&sum, 0.7);
            tape.sum_all(&scaled)
        }, &[a.clone(), b.clone()], EPS);
        prop_assert!(err < TOL, "silu chain err {err}");
    }

    #[test]
    fn embedding_and_layout_gradients((rows, cols) in (2..=6usize, even_dim()),
                                      seed in values(64), v in values(8)) {
        let table = param(vec![rows, cols], seed[..rows * cols].to_vec());
        let vecp = param(vec![cols], v[..cols].to_vec());
        let ids: Vec<u32> = vec![0, (rows - 1) as u32, 0];
        let err = gradcheck(|tape| {
            let e = tape.embedding(&table, &ids).unwrap();
            let shifted = tape.add_row_vec(&e, &vecp).unwrap();
            let left = tape.slice_cols(&shifted, 0, cols / 2).unwrap();
            let right = tape.slice_cols(&shifted, cols / 2, cols / 2).unwrap();
            let swapped = tape.concat_cols(&[right, left]).unwrap();
            let stacked = tape.concat_rows(&[swapped.clone(), swapped]).unwrap();
            let sq = tape.mul(&stacked, &stacked).unwrap();
            tape.sum_all(&sq)
        }, &[table.clone(), vecp.clone()], EPS);
        prop_assert!(err < TOL, "embedding/layout err {err}");
    }

    #[test]
    fn matmul_is_associative_on_small_instances((m, k, n, p) in (dim(), dim(), dim(), dim()),
                                                sa in values(64), sb in values(64), sc in values(64)) {
        let tape = Tape::<f64>::eval();
        let a = Tensor::from_vec(vec![m, k], sa[..m * k].to_vec());
        let b = Tensor::from_vec(vec![k, n], sb[..k * n].to_vec());
        let c = Tensor::from_vec(vec![n, p], sc[..n * p].to_vec());
        let ab_c = tape.matmul(&tape.matmul(&a, &b).unwrap(), &c).unwrap();
        let a_bc = tape.matmul(&a, &tape.matmul(&b, &c).unwrap()).unwrap();
        for (x, y) in ab_c.to_vec().iter().zip(a_bc.to_vec()) {
            prop_assert!((x - y).abs() < 1e-4, "associativity: {x} vs {y}");
        }
    }

    #[test]
    fn adam_with_zero_gradients_never_moves_params(n in dim(), seed in values(8), steps in 1..5u32) {
        let p = Tensor::param(vec![n], seed[..n].to_vec());
        let before = p.to_vec();
        let mut adam = AdamState::new(std::slice::from_ref(&p), 0.1, 0.9, 0.95, 1e-8);
        for _ in 0..steps {
            adam.step(std::slice::from_ref(&p)).unwrap();
        }
        prop_assert_eq!(p.to_vec(), before);
        prop_assert_eq!(adam.t as u32, steps);
    }

    #[test]
    fn dropout_gradients(n in dim(), seed in values(8), mask_bits in values(8)) {
        let x = param(vec![n], seed[..n].to_vec());
        let keep: Vec<bool> = mask_bits[..n].iter().map(|&v| v > 0.0).collect();
        let xc = x.clone();
        let err = gradcheck(|tape| {
            let y = tape.dropout_masked(&xc, keep.clone(), 0.9).unwrap();
            let sq = tape.mul(&y, &y).unwrap();
            tape.sum_all(&sq)
        }, std::slice::from_ref(&x), EPS);
        prop_assert!(err < TOL, "dropout err {err}");
    }
}
