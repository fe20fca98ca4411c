//! Learnable parameters of the decoder and the condition encoders.

use numcore::{Real, Tensor};
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;
use crate::error::Error;
use crate::rng;

pub struct LayerParams<R: Real> {
    pub w_q: Tensor<R>,
    pub w_k: Tensor<R>,
    pub w_v: Tensor<R>,
    pub w_o: Tensor<R>,
    pub norm_attn: Tensor<R>,
    pub norm_ffn: Tensor<R>,
    pub w1: Tensor<R>,
    pub w3: Tensor<R>,
    pub w2: Tensor<R>,
}

/// Per-property affine projection plus its type vector.
pub struct NumericCondParams<R: Real> {
    pub name: String,
    pub w: Tensor<R>,
    pub b: Tensor<R>,
    pub tau: Tensor<R>,
}

pub struct ConditionParams<R: Real> {
    pub numeric: Vec<NumericCondParams<R>>,
    /// Second vocabulary-shaped table added onto token embeddings inside a
    /// fragment condition.
    pub frag_emb: Tensor<R>,
    /// Label vector broadcast over every fragment row.
    pub frag_label: Tensor<R>,
}

/// Everything learnable, owned as a unit. Parameter tensors have
/// `requires_grad` set from construction.
pub struct ModelParams<R: Real> {
    pub config: ModelConfig,
    pub tok_emb: Tensor<R>,
    pub layers: Vec<LayerParams<R>>,
    pub final_norm: Tensor<R>,
    pub out_proj: Tensor<R>,
    pub cond: ConditionParams<R>,
}

impl<R: Real> ModelParams<R> {
    /// Fresh parameters: normal(0, 0.02) for embeddings and projections,
    /// ones for normalization gains. Condition slots are bound to
    /// `condition_names` in order.
    pub fn init(
        config: ModelConfig,
        condition_names: &[String],
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, Error> {
        config.check()?;
        if condition_names.len() != config.n_numeric_conditions {
            return Err(Error::config(format!(
                "{} condition names for {} numeric condition slots",
                condition_names.len(),
                config.n_numeric_conditions
            )));
        }
        let d = config.d_emb;
        let v = config.d_voc;
        let gauss =
            |rng: &mut ChaCha8Rng, n: usize| -> Vec<R> {
                (0..n).map(|_| R::from_f64(rng::normal(rng, 0.02))).collect()
            };
        let mat = |rng: &mut ChaCha8Rng, rows: usize, cols: usize| {
            Tensor::param(vec![rows, cols], gauss(rng, rows * cols))
        };
        let vecp = |rng: &mut ChaCha8Rng, n: usize| Tensor::param(vec![n], gauss(rng, n));
        let ones = |n: usize| Tensor::param(vec![n], vec![R::ONE; n]);

        let tok_emb = mat(rng, v, d);
        let layers = (0..config.n_layers)
            .map(|_| LayerParams {
                w_q: mat(rng, d, d),
                w_k: mat(rng, d, d),
                w_v: mat(rng, d, d),
                w_o: mat(rng, d, d),
                norm_attn: ones(d),
                norm_ffn: ones(d),
                w1: mat(rng, d, config.d_ffn),
                w3: mat(rng, d, config.d_ffn),
                w2: mat(rng, config.d_ffn, d),
            })
            .collect();
        let cond = ConditionParams {
            numeric: condition_names
                .iter()
                .map(|name| NumericCondParams {
                    name: name.clone(),
                    w: vecp(rng, d),
                    b: vecp(rng, d),
                    tau: vecp(rng, d),
                })
                .collect(),
            frag_emb: mat(rng, v, d),
            frag_label: vecp(rng, d),
        };
        Ok(ModelParams {
            tok_emb,
            layers,
            final_norm: ones(d),
            out_proj: mat(rng, d, v),
            config,
            cond,
        })
    }

    /// Zero-filled parameters with the right shapes (checkpoint loading).
    pub fn zeroed(config: ModelConfig, condition_names: &[String]) -> Result<Self, Error> {
        let mut rng = rng::derive(0, rng::STREAM_INIT, 0);
        let params = Self::init(config, condition_names, &mut rng)?;
        for (_, t) in params.named() {
            let zeros = vec![R::ZERO; t.numel()];
            t.set_data(&zeros);
        }
        Ok(params)
    }

    pub fn condition_names(&self) -> Vec<String> {
        self.cond.numeric.iter().map(|c| c.name.clone()).collect()
    }

    pub fn condition_index(&self, name: &str) -> Option<usize> {
        self.cond.numeric.iter().position(|c| c.name == name)
    }

    /// All learnable tensors in a stable order, named for checkpoints.
    pub fn named(&self) -> Vec<(String, Tensor<R>)> {
        let mut out: Vec<(String, Tensor<R>)> = vec![("tok_emb".into(), self.tok_emb.clone())];
        for (i, l) in self.layers.iter().enumerate() {
            out.push((format!("layer{i}.w_q"), l.w_q.clone()));
            out.push((format!("layer{i}.w_k"), l.w_k.clone()));
            out.push((format!("layer{i}.w_v"), l.w_v.clone()));
            out.push((format!("layer{i}.w_o"), l.w_o.clone()));
            out.push((format!("layer{i}.norm_attn"), l.norm_attn.clone()));
            out.push((format!("layer{i}.norm_ffn"), l.norm_ffn.clone()));
            out.push((format!("layer{i}.w1"), l.w1.clone()));
            out.push((format!("layer{i}.w3"), l.w3.clone()));
            out.push((format!("layer{i}.w2"), l.w2.clone()));
        }
        out.push(("final_norm".into(), self.final_norm.clone()));
        out.push(("out_proj".into(), self.out_proj.clone()));
        for (i, c) in self.cond.numeric.iter().enumerate() {
            out.push((format!("cond{i}.{}.w", c.name), c.w.clone()));
            out.push((format!("cond{i}.{}.b", c.name), c.b.clone()));
            out.push((format!("cond{i}.{}.tau", c.name), c.tau.clone()));
        }
        out.push(("frag_emb".into(), self.cond.frag_emb.clone()));
        out.push(("frag_label".into(), self.cond.frag_label.clone()));
        out
    }

    pub fn all(&self) -> Vec<Tensor<R>> {
        self.named().into_iter().map(|(_, t)| t).collect()
    }

    pub fn param_count(&self) -> usize {
        self.named().iter().map(|(_, t)| t.numel()).sum()
    }

    pub fn zero_grads(&self) {
        for t in self.all() {
            t.zero_grad();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_parameter_count_is_about_fifteen_million() {
        let config = ModelConfig::paper(591, 3);
        let names = vec!["a".into(), "b".into(), "c".into()];
        let mut rng = rng::derive(0, rng::STREAM_INIT, 0);
        let params: ModelParams<f32> = ModelParams::init(config, &names, &mut rng).unwrap();
        let count = params.param_count() as f64;
        assert!(
            (count - 15.0e6).abs() / 15.0e6 < 0.10,
            "parameter count {count} not within 10% of 15M"
        );
    }

    #[test]
    fn named_tensors_are_unique() {
        let config = ModelConfig::desk(20, 1);
        let mut rng = rng::derive(1, rng::STREAM_INIT, 0);
        let params: ModelParams<f32> =
            ModelParams::init(config, &["w".into()], &mut rng).unwrap();
        let named = params.named();
        let mut names: Vec<&String> = named.iter().map(|(n, _)| n).collect();
        let before = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), before);
    }

    #[test]
    fn init_is_deterministic_under_seed() {
        let config = ModelConfig::desk(20, 1);
        let a: ModelParams<f32> = ModelParams::init(
            config.clone(),
            &["w".into()],
            &mut rng::derive(7, rng::STREAM_INIT, 0),
        )
        .unwrap();
        let b: ModelParams<f32> = ModelParams::init(
            config,
            &["w".into()],
            &mut rng::derive(7, rng::STREAM_INIT, 0),
        )
        .unwrap();
        assert_eq!(a.tok_emb.to_vec(), b.tok_emb.to_vec());
        assert_eq!(a.layers[0].w_q.to_vec(), b.layers[0].w_q.to_vec());
    }
}
