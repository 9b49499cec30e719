use crate::error::{Error, Result};
use crate::real::Real;
use crate::tensor::Tensor;

/// Squared-error loss of one sample's contribution to a batch of
/// `batch_size` samples: `‖pred − target‖² / n`, with gradient
/// `2(pred − target) / n`.
///
/// Summing the losses of all samples in a batch gives the batch-mean of the
/// per-sample squared L2 norms; there is no per-pixel averaging.
pub fn mse_loss<T: Real>(pred: &Tensor<T>, target: &Tensor<T>, batch_size: usize) -> Result<(T, Tensor<T>)> {
    target.ensure_shape("mse_loss", pred.shape())?;
    if batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    let inv_n = T::one() / T::from_usize(batch_size);
    let two = T::from_f64(2.0);
    let mut loss = T::zero();
    let grad = pred.zip_map(target, |p, t| {
        let r = p - t;
        loss += r * r;
        two * r * inv_n
    })?;
    Ok((loss * inv_n, grad))
}
