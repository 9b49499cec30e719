use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::tensor::Tensor;

/// Stacks `a` (`[Ca, H, W]`) and `b` (`[Cb, H, W]`) into `[Ca + Cb, H, W]`,
/// channels of `a` first.
pub fn concat_channels<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let (ca, h, w) = a.chw("concat_channels")?;
    let (cb, hb, wb) = b.chw("concat_channels")?;
    if (h, w) != (hb, wb) {
        return Err(Error::shape("concat_channels", &[cb, h, w], b.shape()));
    }
    let mut data = Vec::with_capacity(a.len() + b.len());
    data.extend_from_slice(a.data());
    data.extend_from_slice(b.data());
    Tensor::new(&[ca + cb, h, w], data)
}

/// Inverse of [`concat_channels`]; also routes a gradient back to the two
/// inputs.
pub fn split_channels<T: Real>(t: &Tensor<T>, first: usize) -> Result<(Tensor<T>, Tensor<T>)> {
    let (c, h, w) = t.chw("split_channels")?;
    if first == 0 || first >= c {
        return Err(Error::InvalidArgument(alloc::format!(
            "cannot split {c} channels after channel {first}"
        )));
    }
    let (x, y) = t.data().split_at(first * h * w);
    Ok((
        Tensor::new(&[first, h, w], x.to_vec())?,
        Tensor::new(&[c - first, h, w], y.to_vec())?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoder_and_delta_maps_concatenate() {
        let a = Tensor::<f32>::zeros(&[512, 20, 8]);
        let b = Tensor::<f32>::zeros(&[8, 20, 8]);
        assert_eq!(concat_channels(&a, &b).unwrap().shape(), &[520, 20, 8]);
    }

    #[test]
    fn split_inverts_concat() {
        let a = Tensor::<f64>::from_fn(&[2, 3, 4], |i| i as f64);
        let b = Tensor::<f64>::from_fn(&[3, 3, 4], |i| -(i as f64));
        let (x, y) = split_channels(&concat_channels(&a, &b).unwrap(), 2).unwrap();
        assert_eq!((x, y), (a, b));
    }

    #[test]
    fn spatial_mismatch_is_rejected() {
        let a = Tensor::<f32>::zeros(&[1, 3, 4]);
        let b = Tensor::<f32>::zeros(&[1, 4, 3]);
        assert!(matches!(concat_channels(&a, &b), Err(Error::ShapeMismatch { .. })));
    }
}
