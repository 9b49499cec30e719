//! Binary morphology with a square structuring element of side `2r + 1`.
//! Pixels outside the raster neither add to a dilation nor block an
//! erosion.

use alloc::vec;
use alloc::vec::Vec;

use super::mask::BinaryMask;
use crate::error::{Error, Result};

fn check_radius(radius: usize) -> Result<()> {
    if radius == 0 {
        return Err(Error::InvalidArgument("structuring element radius must be at least 1".into()));
    }
    Ok(())
}

/// Separable sliding any/all over rows, then columns.
fn sweep(mask: &BinaryMask, radius: usize, any: bool) -> BinaryMask {
    let (w, h) = mask.dims();
    let pass = |src: &[bool], len: usize, stride: usize, lines: usize, line_stride: usize| -> Vec<bool> {
        let mut out = vec![false; src.len()];
        for line in 0..lines {
            let base = line * line_stride;
            // Running count of set pixels in the clipped window.
            let mut set = 0usize;
            let mut total = 0usize;
            for k in 0..radius.min(len) {
                set += src[base + k * stride] as usize;
                total += 1;
            }
            for i in 0..len {
                if i + radius < len {
                    set += src[base + (i + radius) * stride] as usize;
                    total += 1;
                }
                if i > radius {
                    set -= src[base + (i - radius - 1) * stride] as usize;
                    total -= 1;
                }
                out[base + i * stride] = if any { set > 0 } else { set == total };
            }
        }
        out
    };
    let rows = pass(mask.bits(), w, 1, h, w);
    let cols = pass(&rows, h, w, w, 1);
    BinaryMask::from_bits(w, h, cols).expect("dimensions preserved")
}

pub fn dilate(mask: &BinaryMask, radius: usize) -> Result<BinaryMask> {
    check_radius(radius)?;
    Ok(sweep(mask, radius, true))
}

pub fn erode(mask: &BinaryMask, radius: usize) -> Result<BinaryMask> {
    check_radius(radius)?;
    Ok(sweep(mask, radius, false))
}

/// Dilation followed by erosion.
pub fn close(mask: &BinaryMask, radius: usize) -> Result<BinaryMask> {
    erode(&dilate(mask, radius)?, radius)
}
