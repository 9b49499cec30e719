//! Translation-only registration by exhaustive cross-correlation.

use wearcast_core::Image;

use crate::error::Result;

/// The shift `(dx, dy)` within `±max_shift` that best aligns `moving` to
/// `reference`, i.e. maximizes the mean-removed correlation of
/// `reference(x, y)` with `moving(x - dx, y - dy)` over the overlap. Ties go
/// to the smallest shift.
pub fn estimate_shift(reference: &Image, moving: &Image, max_shift: usize) -> Result<(isize, isize)> {
    reference.ensure_same_dims(moving, "estimate_shift")?;
    let (w, h) = reference.dims();
    let r = max_shift.min(w.saturating_sub(1)).min(h.saturating_sub(1)) as isize;
    let (mr, mm) = (reference.mean() as f32, moving.mean() as f32);
    let mut best = (f64::NEG_INFINITY, 0isize, 0isize);
    let mut shifts: Vec<(isize, isize)> = (-r..=r).flat_map(|dy| (-r..=r).map(move |dx| (dx, dy))).collect();
    shifts.sort_by_key(|&(dx, dy)| (dx.abs() + dy.abs(), dy, dx));
    for (dx, dy) in shifts {
        let mut acc = 0.0f64;
        for y in 0..h as isize {
            let sy = y - dy;
            if sy < 0 || sy >= h as isize {
                continue;
            }
            let mut row = 0.0f32;
            for x in 0..w as isize {
                let sx = x - dx;
                if sx < 0 || sx >= w as isize {
                    continue;
                }
                row += (reference.get(x as usize, y as usize) - mr) * (moving.get(sx as usize, sy as usize) - mm);
            }
            acc += row as f64;
        }
        let overlap = ((w as isize - dx.abs()) * (h as isize - dy.abs())) as f64;
        let score = acc / overlap;
        if score > best.0 {
            best = (score, dx, dy);
        }
    }
    Ok((best.1, best.2))
}

/// `img` moved by `(dx, dy)`, uncovered pixels set to `fill`.
pub fn translate(img: &Image, dx: isize, dy: isize, fill: f32) -> Image {
    let (w, h) = img.dims();
    let mut out = Image::from_fn(w, h, |x, y| {
        let (sx, sy) = (x as isize - dx, y as isize - dy);
        if sx < 0 || sy < 0 || sx >= w as isize || sy >= h as isize {
            fill
        } else {
            img.get(sx as usize, sy as usize)
        }
    });
    out.week = img.week;
    out.side = img.side;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_known_offset() {
        let base = Image::from_fn(40, 30, |x, y| {
            let (fx, fy) = (x as f32 - 18.0, y as f32 - 13.0);
            if fx * fx + 2.0 * fy * fy < 60.0 || (x > 28 && y < 8) {
                0.8
            } else {
                0.15
            }
        });
        let moved = translate(&base, 3, -2, 0.15);
        assert_eq!(estimate_shift(&moved, &base, 5).unwrap(), (3, -2));
        assert_eq!(estimate_shift(&base, &moved, 5).unwrap(), (-3, 2));
        assert_eq!(estimate_shift(&base, &base, 5).unwrap(), (0, 0));
        assert_eq!(translate(&base, 0, 0, 0.0), base);
    }
}
