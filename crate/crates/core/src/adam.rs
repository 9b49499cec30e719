//! Bias-corrected Adam.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T = f32> {
    pub step_count: u64,
    pub first_moment: Tensor<T>,
    pub second_moment: Tensor<T>,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl<T: Real> AdamState<T> {
    pub const DEFAULT_BETA1: f64 = 0.9;
    pub const DEFAULT_BETA2: f64 = 0.999;
    pub const DEFAULT_EPSILON: f64 = 1e-8;

    pub fn new(shape: &[usize]) -> Self {
        Self::with_hyperparameters(shape, Self::DEFAULT_BETA1, Self::DEFAULT_BETA2, Self::DEFAULT_EPSILON)
    }

    pub fn with_hyperparameters(shape: &[usize], beta1: f64, beta2: f64, epsilon: f64) -> Self {
        AdamState {
            step_count: 0,
            first_moment: Tensor::zeros(shape),
            second_moment: Tensor::zeros(shape),
            beta1,
            beta2,
            epsilon,
        }
    }
}

/// One Adam update of `param` in place.
///
/// A non-finite gradient leaves both the parameter and the state untouched
/// and reports divergence.
pub fn adam_step<T: Real>(param: &mut Tensor<T>, grad: &Tensor<T>, state: &mut AdamState<T>, lr: f64) -> Result<()> {
    grad.ensure_shape("adam_step grad", param.shape())?;
    state.first_moment.ensure_shape("adam_step first moment", param.shape())?;
    state.second_moment.ensure_shape("adam_step second moment", param.shape())?;
    if !grad.all_finite() {
        return Err(Error::Divergence(alloc::format!(
            "non-finite gradient at optimizer step {}",
            state.step_count + 1
        )));
    }

    state.step_count += 1;
    let t = state.step_count as i32;
    let b1 = T::from_f64(state.beta1);
    let b2 = T::from_f64(state.beta2);
    let one = T::one();
    // Bias corrections folded into the step size and epsilon.
    let c1 = 1.0 - libm::pow(state.beta1, t as f64);
    let c2 = 1.0 - libm::pow(state.beta2, t as f64);
    let step = T::from_f64(lr / c1);
    let inv_sqrt_c2 = T::from_f64(1.0 / num_traits::Float::sqrt(c2));
    let eps = T::from_f64(state.epsilon);

    let m = state.first_moment.data_mut();
    let v = state.second_moment.data_mut();
    for (((p, &g), m), v) in param.data_mut().iter_mut().zip(grad.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
        *m = b1 * *m + (one - b1) * g;
        *v = b2 * *v + (one - b2) * g * g;
        *p -= step * *m / ((*v).sqrt() * inv_sqrt_c2 + eps);
    }
    Ok(())
}
