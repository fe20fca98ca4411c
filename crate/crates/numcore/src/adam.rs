//! Adam optimizer with bias correction.

use crate::error::NumError;
use crate::scalar::Real;
use crate::tensor::Tensor;

/// Per-parameter first/second moment estimates plus the shared step counter
/// and hyperparameters. Moments are kept in the same element type as the
/// parameters.
pub struct AdamState<R: Real> {
    m: Vec<Vec<R>>,
    v: Vec<Vec<R>>,
    pub t: u64,
    pub alpha: R,
    pub beta1: R,
    pub beta2: R,
    pub epsilon: R,
}

impl<R: Real> AdamState<R> {
    /// Allocates zeroed moments shaped after `params`. The same parameter
    /// slice (same order, same shapes) must be passed to every
    /// [`AdamState::step`].
    pub fn new(params: &[Tensor<R>], alpha: R, beta1: R, beta2: R, epsilon: R) -> Self {
        AdamState {
            m: params.iter().map(|p| vec![R::ZERO; p.numel()]).collect(),
            v: params.iter().map(|p| vec![R::ZERO; p.numel()]).collect(),
            t: 0,
            alpha,
            beta1,
            beta2,
            epsilon,
        }
    }

    /// One bias-corrected Adam update, applied in place. Every parameter
    /// must carry a gradient; gradients are zeroed afterwards.
    pub fn step(&mut self, params: &[Tensor<R>]) -> Result<(), NumError> {
        if params.len() != self.m.len() {
            return Err(NumError::StateMismatch(format!(
                "{} params vs {} moment buffers",
                params.len(),
                self.m.len()
            )));
        }
        for (i, p) in params.iter().enumerate() {
            if p.grad().is_none() {
                return Err(NumError::MissingGrad { index: i });
            }
            if p.numel() != self.m[i].len() {
                return Err(NumError::StateMismatch(format!(
                    "param {i}: {} elements vs moment buffer of {}",
                    p.numel(),
                    self.m[i].len()
                )));
            }
        }
        self.t += 1;
        let t = self.t as i32;
        let bc1 = R::ONE - pow(self.beta1, t);
        let bc2 = R::ONE - pow(self.beta2, t);
        for (i, p) in params.iter().enumerate() {
            let grad = p.grad().expect("checked above");
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            let (alpha, b1, b2, eps) = (self.alpha, self.beta1, self.beta2, self.epsilon);
            p.with_data_mut(|data| {
                for j in 0..data.len() {
                    let g = grad[j];
                    m[j] = b1 * m[j] + (R::ONE - b1) * g;
                    v[j] = b2 * v[j] + (R::ONE - b2) * g * g;
                    let m_hat = m[j] / bc1;
                    let v_hat = v[j] / bc2;
                    data[j] -= alpha * m_hat / (v_hat.sqrt() + eps);
                }
            });
            p.zero_grad();
        }
        Ok(())
    }

    /// Raw moment buffers, for checkpointing.
    pub fn moments(&self) -> (&[Vec<R>], &[Vec<R>]) {
        (&self.m, &self.v)
    }

    /// Restores moment buffers and step counter from a checkpoint.
    pub fn restore(&mut self, m: Vec<Vec<R>>, v: Vec<Vec<R>>, t: u64) -> Result<(), NumError> {
        if m.len() != self.m.len() || v.len() != self.v.len() {
            return Err(NumError::StateMismatch(
                "restored moment count differs".into(),
            ));
        }
        for (a, b) in m.iter().zip(&self.m) {
            if a.len() != b.len() {
                return Err(NumError::StateMismatch("restored moment shape differs".into()));
            }
        }
        self.m = m;
        self.v = v;
        self.t = t;
        Ok(())
    }
}

fn pow<R: Real>(base: R, exp: i32) -> R {
    let mut acc = R::ONE;
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(vals: &[f64]) -> Tensor<f64> {
        Tensor::param(vec![vals.len()], vals.to_vec())
    }

    #[test]
    fn first_step_moves_by_alpha_times_sign() {
        let p = param(&[1.0]);
        p.accumulate_grad(&[0.37]);
        let mut adam = AdamState::new(std::slice::from_ref(&p), 1e-4, 0.9, 0.95, 1e-8);
        adam.step(std::slice::from_ref(&p)).unwrap();
        // With bias correction the first update is -alpha * g / (|g| + eps).
        let delta = p.to_vec()[0] - 1.0;
        assert!((delta + 1e-4).abs() < 1e-8, "delta = {delta}");
    }

    #[test]
    fn zero_gradient_is_a_noop_but_counts_the_step() {
        let p = param(&[2.5]);
        let mut adam = AdamState::new(std::slice::from_ref(&p), 1e-2, 0.9, 0.95, 1e-8);
        adam.step(std::slice::from_ref(&p)).unwrap();
        assert_eq!(p.to_vec(), vec![2.5]);
        assert_eq!(adam.t, 1);
    }

    #[test]
    fn missing_gradient_is_a_state_error() {
        let p = Tensor::from_vec(vec![1], vec![1.0f64]);
        let mut adam = AdamState::new(std::slice::from_ref(&p), 1e-2, 0.9, 0.95, 1e-8);
        assert!(matches!(
            adam.step(std::slice::from_ref(&p)),
            Err(NumError::MissingGrad { index: 0 })
        ));
    }

    #[test]
    fn descends_a_parabola() {
        // 100 steps of f(x) = x^2 from x = 1 at alpha = 0.1. The momentum
        // term makes the iterate cross zero near step 11 and ring down, so
        // |x| decreases strictly only during the approach; the run still has
        // to converge: |x| never exceeds the start and ends below 0.01.
        let p = param(&[1.0]);
        let mut adam = AdamState::new(std::slice::from_ref(&p), 0.1, 0.9, 0.95, 1e-8);
        let mut prev = 1.0f64;
        for step in 0..100 {
            let x = p.to_vec()[0];
            p.accumulate_grad(&[2.0 * x]);
            adam.step(std::slice::from_ref(&p)).unwrap();
            let now = p.to_vec()[0].abs();
            if step < 10 {
                assert!(now < prev, "|x| should decrease while approaching: {now} vs {prev}");
            }
            assert!(now <= 1.0, "|x| should never exceed the starting point");
            prev = now;
        }
        assert!(prev < 0.01, "|x| after 100 steps = {prev}");
    }

    #[test]
    fn gradients_are_zeroed_after_step() {
        let p = param(&[1.0]);
        p.accumulate_grad(&[3.0]);
        let mut adam = AdamState::new(std::slice::from_ref(&p), 1e-3, 0.9, 0.95, 1e-8);
        adam.step(std::slice::from_ref(&p)).unwrap();
        assert_eq!(p.grad().unwrap(), vec![0.0]);
    }
}
