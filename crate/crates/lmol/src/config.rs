//! Model, training, and sampler configuration.

use crate::error::Error;

/// Architecture hyperparameters. `paper()` carries the published defaults;
/// `desk()` is the small configuration for CPU-scale runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub d_emb: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ffn: usize,
    pub d_voc: usize,
    pub max_seq_len: usize,
    pub dropout_p: f32,
    pub n_numeric_conditions: usize,
    pub fragment_cap: usize,
    pub rope_base: u32,
}

impl ModelConfig {
    pub fn paper(d_voc: usize, n_numeric_conditions: usize) -> Self {
        ModelConfig {
            d_emb: 384,
            n_heads: 8,
            n_layers: 8,
            d_ffn: 1024,
            d_voc,
            max_seq_len: 256,
            dropout_p: 0.10,
            n_numeric_conditions,
            fragment_cap: 50,
            rope_base: 10000,
        }
    }

    pub fn desk(d_voc: usize, n_numeric_conditions: usize) -> Self {
        ModelConfig {
            d_emb: 64,
            n_heads: 4,
            n_layers: 2,
            d_ffn: 128,
            d_voc,
            max_seq_len: 256,
            dropout_p: 0.10,
            n_numeric_conditions,
            fragment_cap: 50,
            rope_base: 10000,
        }
    }

    pub fn d_head(&self) -> usize {
        self.d_emb / self.n_heads
    }

    pub fn check(&self) -> Result<(), Error> {
        if self.d_emb == 0
            || self.n_heads == 0
            || self.n_layers == 0
            || self.d_ffn == 0
            || self.d_voc == 0
            || self.max_seq_len == 0
        {
            return Err(Error::config("all dimensions must be positive"));
        }
        if self.d_emb % self.n_heads != 0 {
            return Err(Error::config(format!(
                "d_emb {} must be divisible by n_heads {}",
                self.d_emb, self.n_heads
            )));
        }
        if self.d_head() % 2 != 0 {
            return Err(Error::config(format!(
                "head dimension {} must be even for rotary embeddings",
                self.d_head()
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::config("dropout_p must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Optimization settings. Paper defaults: batch 256 with 4 accumulation
/// steps, constant learning rate 1e-4, betas (0.9, 0.95), p_del 0.15.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub grad_accum: usize,
    pub p_del: f64,
    pub learning_rate: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub adam_epsilon: f32,
    pub max_steps: u64,
    pub seed: u64,
    pub eval_interval: u64,
    /// Optional global-norm gradient clip; off by default.
    pub grad_clip: Option<f32>,
}

impl TrainConfig {
    pub fn paper() -> Self {
        TrainConfig {
            batch_size: 256,
            grad_accum: 4,
            p_del: 0.15,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.95,
            adam_epsilon: 1e-8,
            max_steps: 10_000,
            seed: 0,
            eval_interval: 500,
            grad_clip: None,
        }
    }

    pub fn desk() -> Self {
        TrainConfig {
            batch_size: 32,
            grad_accum: 1,
            p_del: 0.15,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.95,
            adam_epsilon: 1e-8,
            max_steps: 300,
            seed: 0,
            eval_interval: 50,
            grad_clip: None,
        }
    }

    pub fn check(&self) -> Result<(), Error> {
        if self.batch_size == 0 || self.grad_accum == 0 || self.max_steps == 0 {
            return Err(Error::config("batch size, accumulation and steps must be positive"));
        }
        if !(0.0..=1.0).contains(&self.p_del) {
            return Err(Error::config("p_del must lie in [0, 1]"));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::config("learning rate must be positive"));
        }
        Ok(())
    }
}

/// Generation settings. The published experiments sample at temperature
/// 0.8; temperature 0 is accepted as an explicit greedy mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub temperature: f32,
    pub max_new_tokens: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            temperature: 0.8,
            max_new_tokens: 256,
            seed: 0,
        }
    }
}
