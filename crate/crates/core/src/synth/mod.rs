//! Seeded generator of fortnightly outsole impressions.
//!
//! An outsole is a relief map: raised blocks separated by grooves, with
//! bevelled edges, circular dots, shallow bridges between some neighbouring
//! blocks, and a recessed logo whose glyphs sit just below the tread
//! surface. Wear lowers a contact plane at a pressure-dependent rate;
//! material above the plane is removed. An impression records where the
//! remaining material reaches the plane.

mod noise;
mod outsole;
mod series;
mod wear;

pub use noise::{add_noise, foreground_corruption, NoiseSpec};
pub use outsole::{generate_outsole, Outsole, BEVEL_DEPTH, BRIDGE_DEPTH, LOGO_DEPTH, POCKET_DEPTH, TOP};
pub use outsole::Dot;
pub use series::{generate_series, series_weeks, SeriesRecord, LAST_WEEK, MISSING_WEEK};
pub use wear::{advance_wear, WearState, BACKGROUND};

use crate::image::Side;

/// Location and strength of a pressure hot spot, in fractions of the canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressurePeak {
    pub x: f64,
    pub y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WearParams {
    /// Plane drop after 52 weeks at unit pressure factor.
    pub drop_per_year: f64,
    /// Pressure floor added to the peak field.
    pub base_pressure: f64,
    /// Relative amplitude of the hashed rate texture.
    pub texture_amplitude: f64,
    /// Lattice spacing of the texture, in pixels at reference scale.
    pub texture_cell: f64,
    pub peaks: [PressurePeak; 3],
}

impl Default for WearParams {
    fn default() -> Self {
        WearParams {
            drop_per_year: 3.5,
            base_pressure: 0.3,
            texture_amplitude: 0.25,
            texture_cell: 16.0,
            peaks: [
                // heel
                PressurePeak {
                    x: 0.52,
                    y: 0.86,
                    sigma_x: 0.22,
                    sigma_y: 0.07,
                    amplitude: 1.0,
                },
                // ball
                PressurePeak {
                    x: 0.42,
                    y: 0.27,
                    sigma_x: 0.2,
                    sigma_y: 0.07,
                    amplitude: 0.85,
                },
                // toe
                PressurePeak {
                    x: 0.45,
                    y: 0.07,
                    sigma_x: 0.15,
                    sigma_y: 0.04,
                    amplitude: 0.6,
                },
            ],
        }
    }
}

/// Everything that determines an outsole and its wear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutsoleSpec {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub side: Side,
    pub block_count: usize,
    /// Groove width in pixels at reference scale.
    pub groove_width: f64,
    /// Share of blocks carrying a dot.
    pub dot_density: f64,
    /// Centre of the logo, in fractions of the canvas.
    pub logo_center: (f64, f64),
    /// Number of neighbouring block pairs joined by a shallow bridge.
    pub bridge_pairs: usize,
    pub wear: WearParams,
}

/// Canvas the size parameters refer to.
pub const REFERENCE_WIDTH: usize = 256;
pub const REFERENCE_HEIGHT: usize = 640;

impl Default for OutsoleSpec {
    fn default() -> Self {
        OutsoleSpec {
            seed: 0,
            width: REFERENCE_WIDTH,
            height: REFERENCE_HEIGHT,
            side: Side::Left,
            block_count: 63,
            groove_width: 6.0,
            dot_density: 0.35,
            logo_center: (0.5, 0.56),
            bridge_pairs: 4,
            wear: WearParams::default(),
        }
    }
}

impl OutsoleSpec {
    pub fn with_seed(seed: u64) -> Self {
        OutsoleSpec {
            seed,
            ..Self::default()
        }
    }

    /// The same spec for the other shoe: mirrored geometry and a distinct
    /// wear field.
    pub fn for_side(&self, side: Side) -> Self {
        let mut s = *self;
        s.side = side;
        if side == Side::Right {
            for p in &mut s.wear.peaks {
                p.y += 0.015;
                p.amplitude *= 0.92;
                p.sigma_x *= 1.08;
            }
            s.wear.peaks[1].amplitude = (self.wear.peaks[1].amplitude * 1.1).min(1.0);
        }
        s
    }

    /// Linear scale of this canvas relative to the reference canvas.
    pub fn scale(&self) -> f64 {
        num_traits::Float::sqrt((self.width * self.height) as f64 / (REFERENCE_WIDTH * REFERENCE_HEIGHT) as f64)
    }

    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error;
        if self.width < 32 || self.height < 64 || self.width % 32 != 0 || self.height % 32 != 0 {
            return Err(Error::Config(alloc::format!(
                "canvas {}×{} must be at least 64×32 and divisible by 32",
                self.height,
                self.width
            )));
        }
        if self.block_count == 0 {
            return Err(Error::Config("block count must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.dot_density) {
            return Err(Error::Config("dot density must lie in [0, 1]".into()));
        }
        if !(self.groove_width > 0.0) || !(self.wear.drop_per_year >= 0.0) {
            return Err(Error::Config("groove width must be positive and wear non-negative".into()));
        }
        Ok(())
    }
}

/// SplitMix64 finaliser, used for every per-pixel hash.
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of a lattice point to `[0, 1)`.
pub(crate) fn lattice(seed: u64, ix: i64, iy: i64) -> f64 {
    let h = mix(seed ^ mix((ix as u64).wrapping_mul(0x1000_0000_01b3) ^ mix(iy as u64)));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Smoothly interpolated value noise in `[0, 1]`.
pub(crate) fn value_noise(seed: u64, x: f64, y: f64, cell: f64) -> f64 {
    let (gx, gy) = (x / cell, y / cell);
    let (fx, fy) = (num_traits::Float::floor(gx), num_traits::Float::floor(gy));
    let (tx, ty) = (gx - fx, gy - fy);
    let (sx, sy) = (tx * tx * (3.0 - 2.0 * tx), ty * ty * (3.0 - 2.0 * ty));
    let (ix, iy) = (fx as i64, fy as i64);
    let a = lattice(seed, ix, iy);
    let b = lattice(seed, ix + 1, iy);
    let c = lattice(seed, ix, iy + 1);
    let d = lattice(seed, ix + 1, iy + 1);
    let top = a + (b - a) * sx;
    let bottom = c + (d - c) * sx;
    top + (bottom - top) * sy
}
