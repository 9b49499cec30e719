use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" | "Left" | "L" | "l" => Ok(Side::Left),
            "right" | "Right" | "R" | "r" => Ok(Side::Right),
            other => Err(Error::InvalidArgument(alloc::format!("unknown side {other:?}"))),
        }
    }
}

/// Single-channel raster with values in `[0, 1]`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f32>,
    pub week: Option<u32>,
    pub side: Option<Side>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} pixels do not form a {width}×{height} image",
                pixels.len()
            )));
        }
        Ok(Image {
            width,
            height,
            pixels,
            week: None,
            side: None,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        assert!(width > 0 && height > 0, "empty image");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Image {
            width,
            height,
            pixels,
            week: None,
            side: None,
        }
    }

    pub fn with_provenance(mut self, week: u32, side: Side) -> Self {
        self.week = Some(week);
        self.side = Some(side);
        self
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    #[inline]
    pub fn pixels_mut(&mut self) -> &mut [f32] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.dims() == other.dims()
    }

    pub fn ensure_same_dims(&self, other: &Image, op: &'static str) -> Result<()> {
        if !self.same_dims(other) {
            return Err(Error::shape(op, &[self.height, self.width], &[other.height, other.width]));
        }
        Ok(())
    }

    /// Rounds every pixel to the nearest of 256 levels.
    pub fn quantized(&self) -> Image {
        let mut out = self.clone();
        for p in &mut out.pixels {
            *p = level_to_unit(unit_to_level(*p));
        }
        out
    }

    /// 8-bit levels, `round(255·v)` after clamping to `[0, 1]`.
    pub fn to_levels(&self) -> Vec<u8> {
        self.pixels.iter().map(|&p| unit_to_level(p)).collect()
    }

    pub fn from_levels(width: usize, height: usize, levels: &[u8]) -> Result<Self> {
        Self::new(width, height, levels.iter().map(|&l| level_to_unit(l)).collect())
    }

    /// Box-filter downsampling by an integer factor in both axes.
    pub fn downsample(&self, factor: usize) -> Result<Image> {
        if factor == 0 || self.width % factor != 0 || self.height % factor != 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "cannot downsample {}×{} by {factor}",
                self.width,
                self.height
            )));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let (w, h) = (self.width / factor, self.height / factor);
        let norm = 1.0 / (factor * factor) as f64;
        let mut out = Image::from_fn(w, h, |x, y| {
            let mut acc = 0.0f64;
            for dy in 0..factor {
                let row = (y * factor + dy) * self.width;
                for dx in 0..factor {
                    acc += self.pixels[row + x * factor + dx] as f64;
                }
            }
            (acc * norm) as f32
        });
        out.week = self.week;
        out.side = self.side;
        Ok(out)
    }

    pub fn mirrored(&self) -> Image {
        let mut out = Image::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y));
        out.week = self.week;
        out.side = self.side;
        out
    }

    /// `[1, H, W]` tensor view of the pixels.
    pub fn to_tensor<T: Real>(&self) -> Tensor<T> {
        Tensor::new(
            &[1, self.height, self.width],
            self.pixels.iter().map(|&p| T::from_f64(p as f64)).collect(),
        )
        .expect("image dimensions are non-zero")
    }

    pub fn from_tensor<T: Real>(t: &Tensor<T>) -> Result<Image> {
        let (c, h, w) = t.chw("Image::from_tensor")?;
        if c != 1 {
            return Err(Error::shape("Image::from_tensor", &[1, h, w], t.shape()));
        }
        Image::new(w, h, t.data().iter().map(|&v| v.as_f64() as f32).collect())
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().map(|&p| p as f64).sum::<f64>() / self.pixels.len() as f64
    }

    /// Mean squared difference per pixel.
    pub fn mse(&self, other: &Image) -> Result<f64> {
        self.ensure_same_dims(other, "Image::mse")?;
        let s: f64 = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| {
                let d = a as f64 - b as f64;
                d * d
            })
            .sum();
        Ok(s / self.pixels.len() as f64)
    }
}

#[inline]
pub fn unit_to_level(v: f32) -> u8 {
    let c = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    Float::round(c * 255.0) as u8
}

#[inline]
pub fn level_to_unit(l: u8) -> f32 {
    l as f32 / 255.0
}
