use crate::error::Result;
use crate::real::Real;
use crate::tensor::Tensor;

pub fn relu<T: Real>(t: &Tensor<T>) -> Tensor<T> {
    t.map(|x| if x > T::zero() { x } else { T::zero() })
}

/// Gradient of [`relu`]; `cached` may be either the input or the output of
/// the forward pass since both are positive at the same positions.
pub fn relu_backward<T: Real>(grad_out: &Tensor<T>, cached: &Tensor<T>) -> Result<Tensor<T>> {
    grad_out.zip_map(cached, |g, x| if x > T::zero() { g } else { T::zero() })
}

/// Logistic function. Results are clamped into the open interval (0, 1), so
/// saturated inputs never produce exact 0 or 1.
pub fn sigmoid<T: Real>(t: &Tensor<T>) -> Tensor<T> {
    let lo = T::min_positive_value();
    let hi = T::one() - T::epsilon() / T::from_f64(2.0);
    t.map(|x| {
        let s = T::one() / (T::one() + (-x).exp_libm());
        s.max(lo).min(hi)
    })
}

/// Gradient of [`sigmoid`] expressed through its cached output `s`:
/// `∂/∂x = s·(1 − s)`.
pub fn sigmoid_backward<T: Real>(grad_out: &Tensor<T>, output: &Tensor<T>) -> Result<Tensor<T>> {
    grad_out.zip_map(output, |g, s| g * s * (T::one() - s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn relu_clips_negatives() {
        let t = Tensor::new(&[3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&t).data(), &[0.0, 0.0, 2.0]);
        let g = relu_backward(&Tensor::full(&[3], 5.0), &t).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0, 5.0]);
    }

    #[test]
    fn sigmoid_at_origin() {
        let s = sigmoid(&Tensor::<f64>::zeros(&[1]));
        assert_eq!(s.data(), &[0.5]);
        let g = sigmoid_backward(&Tensor::full(&[1], 3.0), &s).unwrap();
        assert_eq!(g.data(), &[0.75]);
    }

    #[test]
    fn sigmoid_stays_inside_open_interval() {
        let t = Tensor::<f32>::new(&[4], vec![-1e4, -90.0, 40.0, 1e4]).unwrap();
        for &v in sigmoid(&t).data() {
            assert!(v > 0.0 && v < 1.0, "{v}");
        }
    }
}
