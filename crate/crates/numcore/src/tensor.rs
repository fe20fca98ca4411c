//! Dense n-dimensional tensor handles.

use std::cell::{Ref, RefCell};
use std::rc::Rc;

use crate::scalar::Real;

struct Inner<R> {
    shape: Vec<usize>,
    data: Vec<R>,
    grad: Option<Vec<R>>,
    requires_grad: bool,
}

/// A dense row-major tensor with an optional gradient buffer.
///
/// `Tensor` is a cheap handle (`Rc`) onto shared storage: ops on a
/// [`crate::Tape`] clone the handle into the recorded graph so that
/// [`crate::Tape::backward`] can accumulate gradients into the same buffer
/// the caller holds. Storage is written once by the op that creates it and
/// mutated afterwards only by the optimizer.
pub struct Tensor<R: Real> {
    inner: Rc<RefCell<Inner<R>>>,
}

impl<R: Real> Clone for Tensor<R> {
    fn clone(&self) -> Self {
        Tensor {
            inner: Rc::clone(&self.inner),
        }
    }
}

impl<R: Real> Tensor<R> {
    pub fn from_vec(shape: Vec<usize>, data: Vec<R>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "tensor data length must equal the product of its dimensions"
        );
        Tensor {
            inner: Rc::new(RefCell::new(Inner {
                shape,
                data,
                grad: None,
                requires_grad: false,
            })),
        }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self::from_vec(shape, vec![R::ZERO; n])
    }

    pub fn scalar(v: R) -> Self {
        Self::from_vec(vec![1], vec![v])
    }

    /// A learnable tensor: `requires_grad` set and a zeroed gradient buffer
    /// allocated up front.
    pub fn param(shape: Vec<usize>, data: Vec<R>) -> Self {
        let t = Self::from_vec(shape, data);
        t.set_requires_grad(true);
        t
    }

    pub fn shape(&self) -> Vec<usize> {
        self.inner.borrow().shape.clone()
    }

    pub fn rank(&self) -> usize {
        self.inner.borrow().shape.len()
    }

    pub fn numel(&self) -> usize {
        self.inner.borrow().data.len()
    }

    pub fn data(&self) -> Ref<'_, [R]> {
        Ref::map(self.inner.borrow(), |i| i.data.as_slice())
    }

    pub fn to_vec(&self) -> Vec<R> {
        self.inner.borrow().data.clone()
    }

    /// The single element of a scalar (shape `[1]`) tensor.
    pub fn item(&self) -> R {
        let inner = self.inner.borrow();
        assert_eq!(inner.data.len(), 1, "item() on a non-scalar tensor");
        inner.data[0]
    }

    pub fn requires_grad(&self) -> bool {
        self.inner.borrow().requires_grad
    }

    pub fn set_requires_grad(&self, on: bool) {
        let mut inner = self.inner.borrow_mut();
        inner.requires_grad = on;
        if on && inner.grad.is_none() {
            inner.grad = Some(vec![R::ZERO; inner.data.len()]);
        }
    }

    pub fn grad(&self) -> Option<Vec<R>> {
        self.inner.borrow().grad.clone()
    }

    pub fn zero_grad(&self) {
        let mut inner = self.inner.borrow_mut();
        if let Some(g) = inner.grad.as_mut() {
            g.iter_mut().for_each(|v| *v = R::ZERO);
        }
    }

    /// Adds `delta` elementwise into the gradient buffer, allocating it if
    /// absent.
    pub fn accumulate_grad(&self, delta: &[R]) {
        let mut inner = self.inner.borrow_mut();
        assert_eq!(delta.len(), inner.data.len());
        let grad = inner.grad.get_or_insert_with(|| vec![R::ZERO; delta.len()]);
        for (g, d) in grad.iter_mut().zip(delta) {
            *g += *d;
        }
    }

    /// Overwrites the stored values. The replacement must have the same
    /// length; intended for the optimizer and for finite-difference probes.
    pub fn set_data(&self, data: &[R]) {
        let mut inner = self.inner.borrow_mut();
        assert_eq!(data.len(), inner.data.len());
        inner.data.copy_from_slice(data);
    }

    /// Mutates a single element in place (finite-difference probes).
    pub fn nudge(&self, index: usize, delta: R) {
        let mut inner = self.inner.borrow_mut();
        inner.data[index] += delta;
    }

    /// In-place access to the raw values (optimizer updates).
    pub(crate) fn with_data_mut(&self, f: impl FnOnce(&mut [R])) {
        let mut inner = self.inner.borrow_mut();
        f(&mut inner.data);
    }

    /// Identity comparison: do two handles share storage?
    pub fn same_storage(&self, other: &Tensor<R>) -> bool {
        Rc::ptr_eq(&self.inner, &other.inner)
    }

    pub fn all_finite(&self) -> bool {
        self.inner.borrow().data.iter().all(|v| v.is_finite())
    }
}

impl<R: Real> std::fmt::Debug for Tensor<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let inner = self.inner.borrow();
        write!(
            f,
            "Tensor(shape={:?}, requires_grad={})",
            inner.shape, inner.requires_grad
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_product_matches_len() {
        let t = Tensor::<f32>::zeros(vec![2, 3]);
        assert_eq!(t.numel(), 6);
        assert_eq!(t.shape(), vec![2, 3]);
    }

    #[test]
    #[should_panic]
    fn mismatched_data_len_panics() {
        let _ = Tensor::<f32>::from_vec(vec![2, 2], vec![1.0; 3]);
    }

    #[test]
    fn param_allocates_grad() {
        let p = Tensor::<f32>::param(vec![3], vec![1.0, 2.0, 3.0]);
        assert!(p.requires_grad());
        assert_eq!(p.grad().unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn grad_accumulates() {
        let p = Tensor::<f32>::param(vec![2], vec![0.0, 0.0]);
        p.accumulate_grad(&[1.0, 2.0]);
        p.accumulate_grad(&[1.0, 2.0]);
        assert_eq!(p.grad().unwrap(), vec![2.0, 4.0]);
    }
}
