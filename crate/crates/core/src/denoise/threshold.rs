use alloc::vec;
use alloc::vec::Vec;

use super::mask::BinaryMask;
use crate::error::{Error, Result};
use crate::image::Image;

/// Which side of the local mean counts as foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// Foreground iff `value > mean + offset`.
    Bright,
    /// Foreground iff `value < mean − offset`.
    Dark,
}

/// Local means over a `window × window` neighbourhood with edge
/// replication. With a support mask, only supported pixels enter the mean
/// and pixels whose window holds no support get `None`.
pub fn local_means(img: &Image, window: usize, support: Option<&BinaryMask>) -> Result<Vec<Option<f64>>> {
    let (w, h) = img.dims();
    if window < 3 || window % 2 == 0 {
        return Err(Error::InvalidArgument(alloc::format!("window {window} must be odd and at least 3")));
    }
    if window > w || window > h {
        return Err(Error::InvalidArgument(alloc::format!(
            "window {window} exceeds the {w}×{h} image"
        )));
    }
    if let Some(s) = support {
        s.ensure_dims(w, h, "threshold support")?;
    }
    let r = window / 2;
    let (pw, ph) = (w + 2 * r, h + 2 * r);
    // Summed-area tables over the edge-replicated padding.
    let stride = pw + 1;
    let mut sum = vec![0.0f64; stride * (ph + 1)];
    let mut cnt = vec![0u32; stride * (ph + 1)];
    for py in 0..ph {
        let sy = py.saturating_sub(r).min(h - 1);
        let mut row_sum = 0.0;
        let mut row_cnt = 0u32;
        for px in 0..pw {
            let sx = px.saturating_sub(r).min(w - 1);
            let on = support.map_or(true, |s| s.get(sx, sy));
            if on {
                row_sum += img.get(sx, sy) as f64;
                row_cnt += 1;
            }
            let i = (py + 1) * stride + px + 1;
            sum[i] = sum[i - stride] + row_sum;
            cnt[i] = cnt[i - stride] + row_cnt;
        }
    }
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            // Window [x, x + window) in padded coordinates.
            let (x0, y0, x1, y1) = (x, y, x + window, y + window);
            let s = sum[y1 * stride + x1] - sum[y0 * stride + x1] - sum[y1 * stride + x0] + sum[y0 * stride + x0];
            let c = cnt[y1 * stride + x1] + cnt[y0 * stride + x0] - cnt[y0 * stride + x1] - cnt[y1 * stride + x0];
            out.push((c > 0).then(|| s / c as f64));
        }
    }
    Ok(out)
}

/// Bright-foreground local adaptive threshold: a pixel is set iff it exceeds
/// its local mean by more than `offset`.
pub fn adaptive_threshold(img: &Image, window: usize, offset: f64) -> Result<BinaryMask> {
    adaptive_threshold_with(img, window, offset, Polarity::Bright, None)
}

/// Local adaptive threshold with a chosen polarity, optionally taking the
/// mean over `support` pixels only.
pub fn adaptive_threshold_with(
    img: &Image,
    window: usize,
    offset: f64,
    polarity: Polarity,
    support: Option<&BinaryMask>,
) -> Result<BinaryMask> {
    let means = local_means(img, window, support)?;
    let bits = img
        .pixels()
        .iter()
        .zip(&means)
        .map(|(&v, m)| match (m, polarity) {
            (None, _) => false,
            (Some(m), Polarity::Bright) => v as f64 > m + offset,
            (Some(m), Polarity::Dark) => (v as f64) < m - offset,
        })
        .collect();
    BinaryMask::from_bits(img.width(), img.height(), bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_image_has_no_foreground() {
        let img = Image::filled(9, 9, 0.4);
        assert!(adaptive_threshold(&img, 3, 0.01).unwrap().is_empty());
    }

    #[test]
    fn window_checks() {
        let img = Image::filled(9, 5, 0.4);
        assert!(adaptive_threshold(&img, 4, 0.0).is_err());
        assert!(adaptive_threshold(&img, 1, 0.0).is_err());
        assert!(adaptive_threshold(&img, 7, 0.0).is_err());
    }

    #[test]
    fn empty_support_sets_nothing() {
        let img = Image::filled(5, 5, 0.0);
        let m = adaptive_threshold_with(&img, 3, 0.0, Polarity::Dark, Some(&BinaryMask::empty(5, 5))).unwrap();
        assert!(m.is_empty());
    }
}
