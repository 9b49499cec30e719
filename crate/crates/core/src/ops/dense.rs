use alloc::vec;

use super::gemm::{axpy, dot};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads<T> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

fn dims<T: Real>(op: &'static str, input: &Tensor<T>, weights: &Tensor<T>) -> Result<(usize, usize)> {
    let [m, n] = *weights.shape() else {
        return Err(Error::shape(op, &[0, input.len()], weights.shape()));
    };
    input.ensure_shape(op, &[n])?;
    Ok((m, n))
}

/// `out[i] = Σ_j w[i, j] · x[j] + b[i]`
pub fn dense_forward<T: Real>(input: &Tensor<T>, weights: &Tensor<T>, bias: &Tensor<T>) -> Result<Tensor<T>> {
    let (m, n) = dims("dense_forward", input, weights)?;
    bias.ensure_shape("dense_forward bias", &[m])?;
    let x = input.data();
    let out = weights
        .data()
        .chunks_exact(n)
        .zip(bias.data())
        .map(|(row, &b)| dot(row, x) + b)
        .collect();
    Tensor::new(&[m], out)
}

pub fn dense_backward<T: Real>(
    grad_out: &Tensor<T>,
    cached_input: &Tensor<T>,
    weights: &Tensor<T>,
) -> Result<DenseGrads<T>> {
    let (m, n) = dims("dense_backward", cached_input, weights)?;
    grad_out.ensure_shape("dense_backward grad_out", &[m])?;
    let x = cached_input.data();
    let mut gx = vec![T::zero(); n];
    let mut gw = vec![T::zero(); m * n];
    for ((&g, row), grow) in grad_out
        .data()
        .iter()
        .zip(weights.data().chunks_exact(n))
        .zip(gw.chunks_exact_mut(n))
    {
        axpy(g, row, &mut gx);
        axpy(g, x, grow);
    }
    Ok(DenseGrads {
        input: Tensor::new(&[n], gx)?,
        weights: Tensor::new(&[m, n], gw)?,
        bias: grad_out.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights_pass_input_through() {
        let x = Tensor::new(&[3], vec![0.5, -2.0, 7.0]).unwrap();
        let eye = Tensor::from_fn(&[3, 3], |i| if i % 4 == 0 { 1.0 } else { 0.0 });
        assert_eq!(dense_forward(&x, &eye, &Tensor::zeros(&[3])).unwrap(), x);
    }

    #[test]
    fn hand_computed_product() {
        let x = Tensor::new(&[2], vec![1.0, 2.0]).unwrap();
        let w = Tensor::new(&[2, 2], vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        let y = dense_forward(&x, &w, &Tensor::zeros(&[2])).unwrap();
        assert_eq!(y.data(), &[3.0, 2.0]);
    }

    #[test]
    fn mismatched_input_is_rejected() {
        let x = Tensor::<f32>::zeros(&[3]);
        let w = Tensor::<f32>::zeros(&[2, 2]);
        assert!(matches!(
            dense_forward(&x, &w, &Tensor::zeros(&[2])),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
