use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::components::{label_components, roi_filter};
use super::mask::BinaryMask;
use super::morph::{close, dilate};
use super::threshold::{local_means, Polarity};
use crate::error::{Error, Result};
use crate::image::{level_to_unit, unit_to_level, Image};

/// Reference resolution the default parameters are tuned for.
pub const REFERENCE_DIMS: (usize, usize) = (256, 640);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseParams {
    /// Odd side of the local-mean window.
    pub window: usize,
    /// Margin below the local background level that marks noise.
    pub offset: f64,
    /// Noise candidates smaller than this are ignored.
    pub min_area: usize,
    pub dilation_radius: usize,
    /// Odd side of the averaging window.
    pub kernel: usize,
    /// `Dark`: debris is darker than the background and the print brighter.
    /// `Bright` handles the inverted case.
    pub polarity: Polarity,
    /// Rounds of "keep pixels at most `background_band` above the local
    /// mean" used to isolate the background before the noise threshold.
    pub background_passes: usize,
    pub background_band: f64,
    /// Margin above the local background level that marks print contact.
    pub print_margin: f64,
}

impl Default for DenoiseParams {
    fn default() -> Self {
        DenoiseParams {
            window: 35,
            offset: 0.02,
            min_area: 30,
            dilation_radius: 1,
            kernel: 5,
            polarity: Polarity::Dark,
            background_passes: 8,
            background_band: 0.08,
            print_margin: 0.1,
        }
    }
}

fn odd_at_least_3(v: f64) -> usize {
    let n = (v + 0.5) as usize;
    let n = if n % 2 == 0 { n + 1 } else { n };
    n.max(3)
}

impl DenoiseParams {
    /// Defaults with window, kernel and minimum area scaled from the
    /// 640×256 reference to `width × height`.
    pub fn for_dims(width: usize, height: usize) -> Self {
        let d = Self::default();
        let (rw, rh) = REFERENCE_DIMS;
        let s = num_traits::Float::sqrt((width * height) as f64 / (rw * rh) as f64);
        DenoiseParams {
            window: odd_at_least_3(d.window as f64 * s).min(odd_floor(width.min(height))),
            kernel: odd_at_least_3(d.kernel as f64 * s),
            min_area: ((d.min_area as f64 * s * s + 0.5) as usize).max(1),
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window % 2 == 0 || self.kernel < 3 || self.kernel % 2 == 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "threshold window {} and averaging kernel {} must be odd and at least 3",
                self.window,
                self.kernel
            )));
        }
        if self.min_area == 0 || self.dilation_radius == 0 || self.background_passes == 0 {
            return Err(Error::InvalidArgument(
                "minimum area, dilation radius and background passes must be positive".into(),
            ));
        }
        if !(self.offset >= 0.0 && self.print_margin >= 0.0 && self.background_band >= 0.0) {
            return Err(Error::InvalidArgument("offsets must be non-negative".into()));
        }
        Ok(())
    }
}

fn odd_floor(n: usize) -> usize {
    if n % 2 == 0 {
        n.saturating_sub(1)
    } else {
        n
    }
}

/// Noise pixels plus the block partition used to repair them.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMap {
    /// Pixels judged to be noise.
    pub noise: BinaryMask,
    /// Per pixel: 0 for background, `1..=block_count` for block features.
    /// Noise pixels carry the label of their nearest non-noise pixel.
    pub block_labels: Vec<u32>,
    pub block_count: usize,
    /// Thresholded noise candidates before ROI filtering.
    pub candidates: BinaryMask,
    /// Print contact pixels.
    pub print: BinaryMask,
    /// Print and noise, dilated; contains every noise pixel.
    pub foreground: BinaryMask,
}

impl NoiseMap {
    /// Share of foreground pixels marked as noise.
    pub fn coverage(&self) -> f64 {
        let fg = self.foreground.count();
        if fg == 0 {
            0.0
        } else {
            self.noise.count() as f64 / fg as f64
        }
    }
}

/// Thresholding, ROI filtering and dilation of noise candidates, and
/// connected-component labelling of block features.
///
/// The background level is estimated locally by repeatedly restricting the
/// local mean to pixels at most `background_band` above the previous mean;
/// the band keeps a flat background from collapsing onto the darkest
/// debris. Noise candidates lie
/// more than `offset` below it, print pixels more than `print_margin` above.
pub fn build_noise_map(img: &Image, params: &DenoiseParams) -> Result<NoiseMap> {
    params.validate()?;
    let (w, h) = img.dims();
    let work = match params.polarity {
        Polarity::Dark => img.clone(),
        Polarity::Bright => Image::from_fn(w, h, |x, y| 1.0 - img.get(x, y)),
    };

    let mut support = BinaryMask::from_fn(w, h, |_, _| true);
    let mut level = local_means(&work, params.window, Some(&support))?;
    for _ in 1..params.background_passes {
        let bits = work
            .pixels()
            .iter()
            .zip(&level)
            .map(|(&v, m)| m.is_some_and(|m| v as f64 <= m + params.background_band))
            .collect();
        support = BinaryMask::from_bits(w, h, bits)?;
        level = local_means(&work, params.window, Some(&support))?;
    }

    let classify = |f: &dyn Fn(f64, f64) -> bool| -> Result<BinaryMask> {
        let bits = work
            .pixels()
            .iter()
            .zip(&level)
            .map(|(&v, m)| m.is_some_and(|m| f(v as f64, m)))
            .collect();
        BinaryMask::from_bits(w, h, bits)
    };
    let candidates = classify(&|v, m| v < m - params.offset)?;
    let noise = dilate(&roi_filter(&candidates, params.min_area)?, params.dilation_radius)?;
    let print = classify(&|v, m| v > m + params.print_margin)?.difference(&noise)?;
    let foreground = dilate(&print.union(&candidates)?, params.dilation_radius)?.union(&noise)?;

    let (mut labels, block_count) = label_components(&close(&print, 1)?.difference(&noise)?);
    inherit_labels(&mut labels, &noise);
    Ok(NoiseMap {
        noise,
        block_labels: labels,
        block_count,
        candidates,
        print,
        foreground,
    })
}

/// Gives every noise pixel the label of its nearest non-noise pixel
/// (8-neighbour breadth-first order).
fn inherit_labels(labels: &mut [u32], noise: &BinaryMask) {
    let (w, h) = noise.dims();
    let mut done: Vec<bool> = noise.bits().iter().map(|&n| !n).collect();
    let mut queue: VecDeque<usize> = (0..w * h).filter(|&i| done[i]).collect();
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % w, i / w);
        for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
            for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                let j = ny * w + nx;
                if !done[j] {
                    done[j] = true;
                    labels[j] = labels[i];
                    queue.push_back(j);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseOutcome {
    pub image: Image,
    pub repaired: usize,
    /// Noise pixels left unchanged because their block has no clean pixel.
    pub unrepaired: usize,
}

/// Replaces each noise pixel by the mean of the clean pixels of the same
/// block inside a `kernel × kernel` window, or of the nearest ring of such
/// pixels when the window holds none. Other pixels are copied unchanged.
pub fn denoise(img: &Image, map: &NoiseMap, kernel: usize) -> Result<DenoiseOutcome> {
    if kernel < 3 || kernel % 2 == 0 {
        return Err(Error::InvalidArgument(alloc::format!("kernel {kernel} must be odd and at least 3")));
    }
    let (w, h) = img.dims();
    map.noise.ensure_dims(w, h, "denoise")?;
    if map.block_labels.len() != w * h {
        return Err(Error::shape("denoise labels", &[h, w], &[map.block_labels.len()]));
    }
    let noise = &map.noise;
    let labels = &map.block_labels;
    let mut has_donor = vec![false; map.block_count + 1];
    for (i, &l) in labels.iter().enumerate() {
        if !noise.at(i) {
            has_donor[l as usize] = true;
        }
    }

    let mean_in_ring = |x: usize, y: usize, label: u32, d: usize, filled: bool| -> Option<f64> {
        let (x0, x1) = (x.saturating_sub(d), (x + d).min(w - 1));
        let (y0, y1) = (y.saturating_sub(d), (y + d).min(h - 1));
        let (mut s, mut n) = (0.0f64, 0usize);
        for ny in y0..=y1 {
            for nx in x0..=x1 {
                let on_ring = nx.abs_diff(x) == d || ny.abs_diff(y) == d;
                if !(filled || on_ring) {
                    continue;
                }
                let j = ny * w + nx;
                if !noise.at(j) && labels[j] == label {
                    s += img.pixels()[j] as f64;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| s / n as f64)
    };

    let mut out = img.clone();
    let (mut repaired, mut unrepaired) = (0, 0);
    let r = kernel / 2;
    let reach = w.max(h);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !noise.at(i) {
                continue;
            }
            let label = labels[i];
            if !has_donor[label as usize] {
                unrepaired += 1;
                continue;
            }
            let value = mean_in_ring(x, y, label, r, true)
                .or_else(|| (r + 1..=reach).find_map(|d| mean_in_ring(x, y, label, d, false)))
                .expect("the block has a donor somewhere");
            out.pixels_mut()[i] = level_to_unit(unit_to_level(value as f32));
            repaired += 1;
        }
    }
    Ok(DenoiseOutcome {
        image: out,
        repaired,
        unrepaired,
    })
}

/// `build_noise_map` followed by `denoise` with the same parameters.
pub fn denoise_image(img: &Image, params: &DenoiseParams) -> Result<(DenoiseOutcome, NoiseMap)> {
    let map = build_noise_map(img, params)?;
    Ok((denoise(img, &map, params.kernel)?, map))
}
