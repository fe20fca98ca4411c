//! Deterministic RNG derivation. Every stochastic consumer gets its own
//! stream derived from (seed, purpose, index), so any point of a run can be
//! reproduced without replaying the whole history.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_INIT: u64 = 1;
pub const STREAM_BATCH: u64 = 2;
pub const STREAM_DROPOUT: u64 = 3;
pub const STREAM_EPOCH: u64 = 4;
pub const STREAM_SAMPLE: u64 = 5;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// A ChaCha stream tied to (seed, stream, index).
pub fn derive(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mixed = splitmix64(seed ^ splitmix64(stream.wrapping_mul(0x9e37_79b9)));
    ChaCha8Rng::seed_from_u64(splitmix64(mixed ^ splitmix64(index)))
}

/// Standard normal draw via Box-Muller, scaled by `std`.
pub fn normal(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    std * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
