//! Dense-tensor numerical core with tape-based reverse-mode automatic
//! differentiation and the Adam optimizer.
//!
//! The crate is generic over the element type through the [`Real`] trait:
//! `f32` is the storage type for training and inference, while `f64` is used
//! by tests to run finite-difference gradient checks at a precision where a
//! 1e-4 relative tolerance is meaningful.
//!
//! A forward pass records ops onto a [`Tape`]; [`Tape::backward`] walks the
//! recorded graph once in reverse and accumulates gradients into every
//! reachable tensor that requires them. The tape is rebuilt from scratch on
//! every training step.

pub mod adam;
pub mod error;
pub mod gradcheck;
pub mod kernels;
pub mod scalar;
pub mod tape;
pub mod tensor;

pub use adam::AdamState;
pub use error::NumError;
pub use gradcheck::gradcheck;
pub use scalar::Real;
pub use tape::{CrossEntropyOut, Tape};
pub use tensor::Tensor;

/// Values at or below this threshold are treated as the −∞ mask sentinel by
/// [`Tape::softmax_rows`]. Finite rather than a true −∞ so that
/// max-subtraction never produces ∞−∞ = NaN.
pub const MASK_SENTINEL: f64 = -1e9;
