//! Central finite-difference gradient verification.

use crate::scalar::Real;
use crate::tape::Tape;
use crate::tensor::Tensor;

/// Compares analytic gradients against central finite differences.
///
/// `f` must be a deterministic forward computation (dropout disabled)
/// returning a scalar loss built on the tape it is given. Returns the worst
/// relative error over all parameter elements, where the relative error of a
/// pair `(a, n)` is `|a - n| / max(|a|, |n|, floor)` with a small floor so
/// that near-zero gradients compare absolutely. A parameter the loss never
/// touches reports exact zero on both sides.
pub fn gradcheck<R, F>(f: F, params: &[Tensor<R>], eps: f64) -> f64
where
    R: Real,
    F: Fn(&Tape<R>) -> Tensor<R>,
{
    for p in params {
        p.zero_grad();
    }
    let tape = Tape::new();
    let loss = f(&tape);
    tape.backward(&loss).expect("gradcheck backward");
    let analytic: Vec<Vec<R>> = params
        .iter()
        .map(|p| p.grad().expect("gradcheck params must require grad"))
        .collect();

    let floor = 1e-6;
    let mut worst = 0.0f64;
    for (pi, p) in params.iter().enumerate() {
        for j in 0..p.numel() {
            let step = R::from_f64(eps);
            p.nudge(j, step);
            let up = eval_loss(&f);
            p.nudge(j, -(step + step));
            let down = eval_loss(&f);
            p.nudge(j, step);

            let numeric = (up - down) / (2.0 * eps);
            let a = analytic[pi][j].to_f64();
            let denom = a.abs().max(numeric.abs()).max(floor);
            let rel = (a - numeric).abs() / denom;
            if rel > worst {
                worst = rel;
            }
        }
    }
    worst
}

fn eval_loss<R: Real, F: Fn(&Tape<R>) -> Tensor<R>>(f: &F) -> f64 {
    let tape = Tape::eval();
    f(&tape).item().to_f64()
}
