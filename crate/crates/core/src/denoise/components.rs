use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::mask::BinaryMask;
use crate::error::{Error, Result};

/// Connected-component labelling, 8-connected. Returns one label per pixel
/// (0 for unset pixels, components numbered 1.. in raster order of their
/// first pixel) and the component count.
pub fn label_components(mask: &BinaryMask) -> (Vec<u32>, usize) {
    let (w, h) = mask.dims();
    let mut labels = vec![0u32; w * h];
    let mut queue = VecDeque::new();
    let mut next = 0u32;
    for start in 0..w * h {
        if !mask.at(start) || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if mask.at(j) && labels[j] == 0 {
                        labels[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    (labels, next as usize)
}

/// Pixel count of each component; index 0 is unused.
pub fn component_areas(labels: &[u32], count: usize) -> Vec<usize> {
    let mut areas = vec![0usize; count + 1];
    for &l in labels {
        areas[l as usize] += 1;
    }
    areas[0] = 0;
    areas
}

/// Removes 8-connected components smaller than `min_area` pixels.
pub fn roi_filter(mask: &BinaryMask, min_area: usize) -> Result<BinaryMask> {
    if min_area == 0 {
        return Err(Error::InvalidArgument("minimum area must be at least 1".into()));
    }
    let (labels, count) = label_components(mask);
    let areas = component_areas(&labels, count);
    let bits = labels.iter().map(|&l| l != 0 && areas[l as usize] >= min_area).collect();
    BinaryMask::from_bits(mask.width(), mask.height(), bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pixels_are_connected() {
        let m = BinaryMask::from_fn(4, 4, |x, y| x == y);
        assert_eq!(label_components(&m).1, 1);
    }

    #[test]
    fn small_blob_is_removed() {
        let m = BinaryMask::from_fn(6, 6, |x, y| y == 1 && x < 3);
        assert!(roi_filter(&m, 4).unwrap().is_empty());
        assert_eq!(roi_filter(&m, 1).unwrap(), m);
        assert!(roi_filter(&m, 0).is_err());
    }
}
