use alloc::vec::Vec;

// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{REFERENCE_HEIGHT, REFERENCE_WIDTH};
use crate::denoise::BinaryMask;
use crate::error::{Error, Result};
use crate::image::Image;

/// Dark artefacts laid over an impression: fibres, dust blobs and the rims
/// of air bubbles. Lengths are in pixels at reference scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub fibres: usize,
    pub blobs: usize,
    pub bubbles: usize,
    /// Multiplier on the item counts; 0 leaves images untouched.
    pub intensity: f64,
    pub fibre_length: (f64, f64),
    pub fibre_width: (f64, f64),
    pub blob_radius: (f64, f64),
    pub bubble_radius: (f64, f64),
    pub bubble_rim: f64,
    /// Range of artefact intensities.
    pub value: (f64, f64),
    /// Linear scale of the canvas relative to the reference canvas.
    pub scale: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            fibres: 24,
            blobs: 14,
            bubbles: 10,
            intensity: 1.0,
            fibre_length: (30.0, 90.0),
            fibre_width: (1.0, 2.0),
            blob_radius: (3.5, 6.0),
            bubble_radius: (6.0, 14.0),
            bubble_rim: 1.5,
            value: (0.0, 0.06),
            scale: 1.0,
        }
    }
}

/// Pixels brighter than this count as print when choosing where items land.
const FOREGROUND: f32 = 0.3;

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            intensity: 0.0,
            ..Self::default()
        }
    }

    /// Default artefacts sized for a `width`×`height` canvas.
    pub fn for_dims(width: usize, height: usize) -> Self {
        NoiseSpec {
            scale: ((width * height) as f64 / (REFERENCE_WIDTH * REFERENCE_HEIGHT) as f64).sqrt(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [self.fibre_length, self.fibre_width, self.blob_radius, self.bubble_radius, self.value];
        if ranges.iter().any(|&(lo, hi)| !(lo >= 0.0 && hi >= lo)) {
            return Err(Error::Config("noise ranges must be non-negative and ordered".into()));
        }
        if !(self.intensity >= 0.0) || !(self.scale > 0.0) || !(self.value.1 <= 1.0) {
            return Err(Error::Config("noise intensity and scale must be non-negative".into()));
        }
        Ok(())
    }

    fn count(&self, n: usize) -> usize {
        (n as f64 * self.intensity + 0.5) as usize
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

struct Painter<'a> {
    image: &'a mut Image,
    original: &'a Image,
    truth: &'a mut BinaryMask,
}

impl Painter<'_> {
    fn paint(&mut self, x: isize, y: isize, v: f32) {
        let (w, h) = self.image.dims();
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            return;
        }
        let (x, y) = (x as usize, y as usize);
        let v = v.min(self.image.get(x, y));
        self.image.set(x, y, v);
        self.truth.set(x, y, v != self.original.get(x, y));
    }

    fn disk(&mut self, cx: f64, cy: f64, r: f64, v: f32) {
        let reach = r.ceil() as isize + 1;
        let (ix, iy) = (cx.floor() as isize, cy.floor() as isize);
        for y in iy - reach..=iy + reach {
            for x in ix - reach..=ix + reach {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= r * r {
                    self.paint(x, y, v);
                }
            }
        }
    }

    fn ring(&mut self, cx: f64, cy: f64, r: f64, rim: f64, v: f32) {
        let reach = (r + rim).ceil() as isize + 1;
        let (ix, iy) = (cx.floor() as isize, cy.floor() as isize);
        for y in iy - reach..=iy + reach {
            for x in ix - reach..=ix + reach {
                let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt();
                if (d - r).abs() <= rim / 2.0 {
                    self.paint(x, y, v);
                }
            }
        }
    }
}

/// Share of print pixels (brighter than the anchor threshold) that `truth`
/// marks as corrupted.
pub fn foreground_corruption(clean: &Image, truth: &BinaryMask) -> f64 {
    let fg: Vec<usize> = (0..clean.pixels().len()).filter(|&i| clean.pixels()[i] > FOREGROUND).collect();
    if fg.is_empty() {
        return 0.0;
    }
    fg.iter().filter(|&&i| truth.at(i)).count() as f64 / fg.len() as f64
}

/// Overlays seeded artefacts on `image`. Returns the corrupted image and
/// the exact set of pixels whose value changed.
pub fn add_noise(image: &Image, spec: &NoiseSpec, seed: u64) -> Result<(Image, BinaryMask)> {
    spec.validate()?;
    let (w, h) = image.dims();
    let mut out = image.clone();
    let mut truth = BinaryMask::like(image);
    let anchors: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| image.get(x, y) > FOREGROUND)
        .collect();
    if anchors.is_empty() || spec.intensity == 0.0 {
        return Ok((out, truth));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = spec.scale;
    let mut p = Painter {
        image: &mut out,
        original: image,
        truth: &mut truth,
    };
    let value = |rng: &mut ChaCha8Rng| {
        let v = uniform(rng, spec.value) as f32;
        crate::image::level_to_unit(crate::image::unit_to_level(v))
    };
    let anchor = |rng: &mut ChaCha8Rng| {
        let (x, y) = anchors[rng.gen_range(0..anchors.len())];
        (x as f64 + 0.5, y as f64 + 0.5)
    };

    for _ in 0..spec.count(spec.fibres) {
        let (mut x, mut y) = anchor(&mut rng);
        let len = uniform(&mut rng, spec.fibre_length) * s;
        let half = (uniform(&mut rng, spec.fibre_width) * s).max(0.5) / 2.0;
        let v = value(&mut rng);
        let mut angle = rng.gen::<f64>() * core::f64::consts::TAU;
        let mut walked = 0.0;
        while walked < len {
            p.disk(x, y, half.max(0.5), v);
            angle += (rng.gen::<f64>() - 0.5) * 0.3;
            x += libm::cos(angle) * 0.5;
            y += libm::sin(angle) * 0.5;
            walked += 0.5;
        }
    }
    for _ in 0..spec.count(spec.blobs) {
        let (x, y) = anchor(&mut rng);
        let r = uniform(&mut rng, spec.blob_radius) * s;
        let v = value(&mut rng);
        // A few overlapping disks give an irregular outline.
        for _ in 0..3 {
            let (dx, dy) = ((rng.gen::<f64>() - 0.5) * r, (rng.gen::<f64>() - 0.5) * r);
            p.disk(x + dx, y + dy, r * (0.6 + 0.4 * rng.gen::<f64>()), v);
        }
    }
    for _ in 0..spec.count(spec.bubbles) {
        let (x, y) = anchor(&mut rng);
        let r = uniform(&mut rng, spec.bubble_radius) * s;
        let v = value(&mut rng);
        p.ring(x, y, r, (spec.bubble_rim * s).max(1.0), v);
    }
    Ok((out, truth))
}
