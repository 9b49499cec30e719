use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{mix, value_noise, OutsoleSpec};
use crate::denoise::{label_components, BinaryMask};
use crate::error::{Error, Result};
use crate::image::{Image, Side};

/// Height of the unworn tread surface.
pub const TOP: f64 = 10.0;
/// Drop of a block edge below the tread surface.
pub const BEVEL_DEPTH: f64 = 2.5;
/// Width of the bevel at reference scale.
const BEVEL_WIDTH: f64 = 4.0;
/// Depth of the shallow groove joining a bridged pair.
pub const BRIDGE_DEPTH: f64 = 1.3;
/// Depth of the recess holding the logo.
pub const POCKET_DEPTH: f64 = 6.0;
/// Depth of the logo glyphs below the tread surface.
pub const LOGO_DEPTH: f64 = 0.9;
const DOT_DEPTH: (f64, f64) = (0.5, 2.6);
const DOT_RADIUS: (f64, f64) = (4.0, 6.0);
const MIN_BLOCK_AREA: f64 = 150.0;
const GEOMETRY_ATTEMPTS: usize = 24;

/// Glyph strokes as `(x0, y0, x1, y1)` in a 24×36 cell.
const GLYPHS: [&[(f64, f64, f64, f64)]; 3] = [
    &[
        (0.0, 0.0, 24.0, 8.0),
        (0.0, 0.0, 8.0, 36.0),
        (0.0, 28.0, 24.0, 36.0),
        (16.0, 18.0, 24.0, 36.0),
        (12.0, 18.0, 24.0, 24.0),
    ],
    &[
        (0.0, 0.0, 8.0, 36.0),
        (0.0, 0.0, 24.0, 8.0),
        (0.0, 14.0, 20.0, 22.0),
        (0.0, 28.0, 24.0, 36.0),
    ],
    &[(0.0, 0.0, 8.0, 36.0), (0.0, 28.0, 24.0, 36.0)],
];
const GLYPH_W: f64 = 24.0;
const GLYPH_H: f64 = 36.0;
const GLYPH_GAP: f64 = 8.0;
const POCKET_MARGIN: f64 = 8.0;

/// A circular recess inside a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dot {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub depth: f64,
    pub block: u32,
}

/// Static geometry and wear field of one outsole.
#[derive(Debug, Clone, PartialEq)]
pub struct Outsole {
    pub(crate) spec: OutsoleSpec,
    pub(crate) width: usize,
    pub(crate) height: usize,
    /// Unworn material height per pixel; 0 in grooves and off the sole.
    pub(crate) relief: Vec<f32>,
    /// Plane drop per week.
    pub(crate) rate: Vec<f32>,
    /// Contact tolerance multiplier (higher under pressure).
    pub(crate) weight: Vec<f32>,
    pub(crate) sole: Vec<bool>,
    block_labels: Vec<u32>,
    /// Nearest block seed of every sole pixel, `u32::MAX` elsewhere.
    cells: Vec<u32>,
    block_count: usize,
    pocket: Vec<bool>,
    glyph: Vec<bool>,
    dots: Vec<Dot>,
    bridges: Vec<(u32, u32)>,
}

fn gauss(t: f64) -> f64 {
    libm::exp(-t * t)
}

/// Half width of the sole at relative height `v` (0 at the toe), as a
/// fraction of the canvas width, and the centre line.
fn outline(v: f64) -> (f64, f64) {
    let t = ((v - 0.5) / 0.485).abs();
    if t >= 1.0 {
        return (0.0, 0.5);
    }
    let taper = libm::pow(1.0 - libm::pow(t, 2.6), 1.0 / 2.6);
    let shape = 0.78 + 0.2 * gauss((v - 0.27) / 0.16) - 0.1 * gauss((v - 0.6) / 0.12);
    let centre = 0.5 - 0.03 * gauss((v - 0.25) / 0.2);
    (0.45 * shape * taper, centre)
}

/// Chamfer distance (1, √2) from every set pixel to the nearest unset pixel
/// or the canvas border.
fn distance_inside(mask: &[bool], w: usize, h: usize) -> Vec<f64> {
    const D: f64 = core::f64::consts::SQRT_2;
    let far = (w + h) as f64;
    let mut d: Vec<f64> = mask.iter().map(|&m| if m { far } else { 0.0 }).collect();
    let at = |d: &[f64], x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            d[y as usize * w + x as usize]
        }
    };
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            if d[i] == 0.0 {
                continue;
            }
            let v = d[i]
                .min(at(&d, x - 1, y) + 1.0)
                .min(at(&d, x, y - 1) + 1.0)
                .min(at(&d, x - 1, y - 1) + D)
                .min(at(&d, x + 1, y - 1) + D);
            d[i] = v;
        }
    }
    for y in (0..h as isize).rev() {
        for x in (0..w as isize).rev() {
            let i = y as usize * w + x as usize;
            if d[i] == 0.0 {
                continue;
            }
            let v = d[i]
                .min(at(&d, x + 1, y) + 1.0)
                .min(at(&d, x, y + 1) + 1.0)
                .min(at(&d, x + 1, y + 1) + D)
                .min(at(&d, x - 1, y + 1) + D);
            d[i] = v;
        }
    }
    d
}

struct Canvas {
    w: usize,
    h: usize,
    s: f64,
}

impl Canvas {
    fn centre(&self, i: usize) -> (f64, f64) {
        ((i % self.w) as f64 + 0.5, (i / self.w) as f64 + 0.5)
    }
}

/// Nearest and second-nearest seed with the distance to their bisector.
fn nearest_two(seeds: &[(f64, f64)], x: f64, y: f64) -> (usize, usize, f64) {
    let (mut i, mut j) = (0usize, usize::MAX);
    let (mut di, mut dj) = (f64::INFINITY, f64::INFINITY);
    for (k, &(sx, sy)) in seeds.iter().enumerate() {
        let d = (sx - x) * (sx - x) + (sy - y) * (sy - y);
        if d < di {
            (j, dj) = (i, di);
            (i, di) = (k, d);
        } else if d < dj {
            (j, dj) = (k, d);
        }
    }
    if j == usize::MAX {
        return (i, i, f64::INFINITY);
    }
    // Distance to the cell boundary is the smallest bisector distance.
    let mut b = f64::INFINITY;
    for (k, &(sx, sy)) in seeds.iter().enumerate() {
        if k == i {
            continue;
        }
        let dk = (sx - x) * (sx - x) + (sy - y) * (sy - y);
        let sep = ((sx - seeds[i].0).powi(2) + (sy - seeds[i].1).powi(2)).sqrt();
        if sep > 0.0 {
            b = b.min((dk - di) / (2.0 * sep));
        }
    }
    (i, j, b)
}

fn place_seeds(rng: &mut ChaCha8Rng, c: &Canvas, allowed: &[bool], dist: &[f64], n: usize, margin: f64) -> Vec<(f64, f64)> {
    let area = allowed.iter().filter(|&&a| a).count() as f64;
    let mut r_min = 0.8 * (area / n as f64).sqrt();
    loop {
        let mut seeds: Vec<(f64, f64)> = Vec::with_capacity(n);
        for _ in 0..400 * n {
            if seeds.len() == n {
                break;
            }
            let x = rng.gen::<f64>() * c.w as f64;
            let y = rng.gen::<f64>() * c.h as f64;
            let i = (y as usize).min(c.h - 1) * c.w + (x as usize).min(c.w - 1);
            if !allowed[i] || dist[i] < margin {
                continue;
            }
            if seeds.iter().all(|&(sx, sy)| (sx - x).powi(2) + (sy - y).powi(2) >= r_min * r_min) {
                seeds.push((x, y));
            }
        }
        if seeds.len() == n {
            return seeds;
        }
        r_min *= 0.93;
    }
}

/// Moves every seed to the centroid of its cell.
fn relax(seeds: &mut [(f64, f64)], c: &Canvas, allowed: &[bool], dist: &[f64], margin: f64) {
    let mut acc = vec![(0.0f64, 0.0f64, 0usize); seeds.len()];
    for (i, &a) in allowed.iter().enumerate() {
        if !a {
            continue;
        }
        let (x, y) = c.centre(i);
        let (k, _, _) = nearest_two(seeds, x, y);
        acc[k].0 += x;
        acc[k].1 += y;
        acc[k].2 += 1;
    }
    for (s, &(sx, sy, n)) in seeds.iter_mut().zip(&acc) {
        if n > 0 {
            let (cx, cy) = (sx / n as f64, sy / n as f64);
            let i = (cy as usize).min(c.h - 1) * c.w + (cx as usize).min(c.w - 1);
            if allowed[i] && dist[i] >= margin {
                *s = (cx, cy);
            }
        }
    }
}

struct Layout {
    labels: Vec<u32>,
    cells: Vec<u32>,
    second: Vec<u32>,
    bisector: Vec<f64>,
    edge: Vec<f64>,
}

fn layout(seeds: &[(f64, f64)], c: &Canvas, allowed: &[bool], dist: &[f64], groove: f64) -> Layout {
    let n = c.w * c.h;
    let mut out = Layout {
        labels: vec![0; n],
        cells: vec![u32::MAX; n],
        second: vec![u32::MAX; n],
        bisector: vec![0.0; n],
        edge: vec![f64::NEG_INFINITY; n],
    };
    for i in 0..n {
        if !allowed[i] {
            continue;
        }
        let (x, y) = c.centre(i);
        let (k, j, b) = nearest_two(seeds, x, y);
        let e = (b - groove / 2.0).min(dist[i] - groove / 2.0);
        out.cells[i] = k as u32;
        out.second[i] = j as u32;
        out.bisector[i] = b;
        out.edge[i] = e;
        if e >= 0.0 {
            out.labels[i] = k as u32 + 1;
        }
    }
    out
}

fn blocks_are_sound(labels: &[u32], c: &Canvas, n: usize) -> bool {
    let mask = BinaryMask::from_bits(c.w, c.h, labels.iter().map(|&l| l > 0).collect()).expect("dims");
    let (components, count) = label_components(&mask);
    if count != n {
        return false;
    }
    // Every block must be one component of the groove-separated mask.
    let mut seen = vec![0u32; n + 1];
    let mut area = vec![0usize; n + 1];
    for (&l, &comp) in labels.iter().zip(&components) {
        if l == 0 {
            continue;
        }
        area[l as usize] += 1;
        if seen[l as usize] == 0 {
            seen[l as usize] = comp;
        } else if seen[l as usize] != comp {
            return false;
        }
    }
    area[1..].iter().all(|&a| a as f64 >= MIN_BLOCK_AREA * c.s * c.s)
}

/// Glyph and pocket rasters for a logo centred at `(cx, cy)` pixels.
fn logo(c: &Canvas, cx: f64, cy: f64) -> (Vec<bool>, Vec<bool>, (f64, f64, f64, f64)) {
    let s = c.s;
    let text_w = (3.0 * GLYPH_W + 2.0 * GLYPH_GAP) * s;
    let (x0, y0) = (cx - text_w / 2.0, cy - GLYPH_H * s / 2.0);
    let m = POCKET_MARGIN * s;
    let rect = (x0 - m, y0 - m, x0 + text_w + m, y0 + GLYPH_H * s + m);
    let mut pocket = vec![false; c.w * c.h];
    let mut glyph = vec![false; c.w * c.h];
    for i in 0..c.w * c.h {
        let (x, y) = c.centre(i);
        if x < rect.0 || x >= rect.2 || y < rect.1 || y >= rect.3 {
            continue;
        }
        pocket[i] = true;
        for (g, strokes) in GLYPHS.iter().enumerate() {
            let gx = (x - x0) / s - g as f64 * (GLYPH_W + GLYPH_GAP);
            let gy = (y - y0) / s;
            if strokes.iter().any(|&(a, b, c2, d)| gx >= a && gx < c2 && gy >= b && gy < d) {
                glyph[i] = true;
            }
        }
    }
    (pocket, glyph, rect)
}

/// Peak pressure field in `[0, 1]`-ish at pixel centre `(x, y)`.
fn pressure(spec: &OutsoleSpec, x: f64, y: f64) -> f64 {
    let (u, v) = (x / spec.width as f64, y / spec.height as f64);
    spec.wear
        .peaks
        .iter()
        .map(|p| {
            let (dx, dy) = ((u - p.x) / p.sigma_x, (v - p.y) / p.sigma_y);
            p.amplitude * libm::exp(-0.5 * (dx * dx + dy * dy))
        })
        .fold(0.0, f64::max)
}

fn texture_seed(spec: &OutsoleSpec) -> u64 {
    mix(spec.seed ^ match spec.side {
        Side::Left => 0x1ef7_0000,
        Side::Right => 0x5167_0000,
    })
}

/// Builds the outsole described by `spec`. Deterministic per seed; the
/// right shoe mirrors the left geometry.
pub fn generate_outsole(spec: &OutsoleSpec) -> Result<Outsole> {
    spec.validate()?;
    let c = Canvas {
        w: spec.width,
        h: spec.height,
        s: spec.scale(),
    };
    let n_px = c.w * c.h;
    let groove = spec.groove_width * c.s;
    let bevel = BEVEL_WIDTH * c.s;

    let sole: Vec<bool> = (0..n_px)
        .map(|i| {
            let (x, y) = c.centre(i);
            let (hw, centre) = outline(y / c.h as f64);
            (x / c.w as f64 - centre).abs() < hw
        })
        .collect();
    let (lx, ly) = spec.logo_center;
    let (pocket, glyph, rect) = logo(&c, lx * c.w as f64, ly * c.h as f64);
    let allowed: Vec<bool> = (0..n_px)
        .map(|i| {
            let (x, y) = c.centre(i);
            sole[i] && !(x >= rect.0 && x < rect.2 && y >= rect.1 && y < rect.3)
        })
        .collect();
    let dist = distance_inside(&allowed, c.w, c.h);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut chosen = None;
    for _ in 0..GEOMETRY_ATTEMPTS {
        let mut seeds = place_seeds(&mut rng, &c, &allowed, &dist, spec.block_count, groove);
        for _ in 0..3 {
            relax(&mut seeds, &c, &allowed, &dist, groove);
        }
        let lay = layout(&seeds, &c, &allowed, &dist, groove);
        if blocks_are_sound(&lay.labels, &c, spec.block_count) {
            chosen = Some(lay);
            break;
        }
    }
    let lay = chosen.ok_or_else(|| {
        Error::Config(alloc::format!(
            "could not lay out {} separated blocks on a {}×{} canvas",
            spec.block_count,
            c.h,
            c.w
        ))
    })?;

    let mut relief = vec![0.0f64; n_px];
    let mut best = vec![(f64::NEG_INFINITY, 0usize); spec.block_count + 1];
    for i in 0..n_px {
        let l = lay.labels[i] as usize;
        if l == 0 {
            continue;
        }
        let e = lay.edge[i];
        let t = (1.0 - e / bevel).max(0.0);
        relief[i] = TOP - BEVEL_DEPTH * t * t;
        if e > best[l].0 {
            best[l] = (e, i);
        }
    }

    // Register bridges between the highest-pressure neighbouring pairs.
    let mut shared: BTreeMap<(u32, u32), (usize, f64)> = BTreeMap::new();
    for i in 0..n_px {
        if lay.cells[i] == u32::MAX || lay.labels[i] != 0 || lay.second[i] == u32::MAX {
            continue;
        }
        if lay.bisector[i] >= groove / 2.0 || dist[i] < groove {
            continue;
        }
        let (a, b) = (lay.cells[i].min(lay.second[i]) + 1, lay.cells[i].max(lay.second[i]) + 1);
        let (x, y) = c.centre(i);
        let e = shared.entry((a, b)).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += pressure(spec, x, y);
    }
    let mut pairs: Vec<((u32, u32), f64)> = shared
        .into_iter()
        .filter(|&(_, (count, _))| count as f64 >= 8.0 * c.s)
        .map(|(k, (count, p))| (k, p / count as f64))
        .collect();
    pairs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut bridges: Vec<(u32, u32)> = Vec::new();
    for (pair, _) in pairs {
        if bridges.len() == spec.bridge_pairs {
            break;
        }
        if bridges.iter().all(|&(a, b)| a != pair.0 && a != pair.1 && b != pair.0 && b != pair.1) {
            bridges.push(pair);
        }
    }
    for i in 0..n_px {
        if lay.cells[i] == u32::MAX || lay.second[i] == u32::MAX || dist[i] < groove / 2.0 {
            continue;
        }
        let (a, b) = (lay.cells[i].min(lay.second[i]) + 1, lay.cells[i].max(lay.second[i]) + 1);
        if lay.bisector[i] < groove / 2.0 + bevel && bridges.contains(&(a, b)) {
            relief[i] = relief[i].max(TOP - BRIDGE_DEPTH);
        }
    }

    let mut dots = Vec::new();
    for block in 1..=spec.block_count {
        let roll = rng.gen::<f64>();
        let radius = (DOT_RADIUS.0 + rng.gen::<f64>() * (DOT_RADIUS.1 - DOT_RADIUS.0)) * c.s;
        let depth = DOT_DEPTH.0 + rng.gen::<f64>() * (DOT_DEPTH.1 - DOT_DEPTH.0);
        let (room, at) = best[block];
        if roll >= spec.dot_density || room < radius + bevel {
            continue;
        }
        let (x, y) = c.centre(at);
        dots.push(Dot {
            x,
            y,
            radius,
            depth,
            block: block as u32,
        });
    }
    for d in &dots {
        for i in 0..n_px {
            let (x, y) = c.centre(i);
            if (x - d.x).powi(2) + (y - d.y).powi(2) <= d.radius * d.radius {
                relief[i] = relief[i].min(TOP - d.depth);
            }
        }
    }
    for i in 0..n_px {
        if pocket[i] && sole[i] {
            relief[i] = if glyph[i] { TOP - LOGO_DEPTH } else { TOP - POCKET_DEPTH };
        }
    }

    let mut outsole = Outsole {
        spec: *spec,
        width: c.w,
        height: c.h,
        relief: relief.iter().map(|&r| r as f32).collect(),
        rate: vec![0.0; n_px],
        weight: vec![0.0; n_px],
        sole,
        block_labels: lay.labels,
        cells: lay.cells,
        block_count: spec.block_count,
        pocket: pocket.iter().zip(&glyph).map(|(&p, &g)| p && !g).collect(),
        glyph,
        dots,
        bridges,
    };
    if spec.side == Side::Right {
        outsole.mirror();
    }
    outsole.fill_wear_field();
    Ok(outsole)
}

fn mirror_raster<T: Copy>(v: &mut [T], w: usize) {
    for row in v.chunks_mut(w) {
        row.reverse();
    }
}

impl Outsole {
    fn mirror(&mut self) {
        let w = self.width;
        mirror_raster(&mut self.relief, w);
        mirror_raster(&mut self.sole, w);
        mirror_raster(&mut self.block_labels, w);
        mirror_raster(&mut self.cells, w);
        mirror_raster(&mut self.pocket, w);
        mirror_raster(&mut self.glyph, w);
        for d in &mut self.dots {
            d.x = w as f64 - d.x;
        }
    }

    fn fill_wear_field(&mut self) {
        let spec = &self.spec;
        let seed = texture_seed(spec);
        let cell = spec.wear.texture_cell * spec.scale();
        for i in 0..self.width * self.height {
            let (x, y) = ((i % self.width) as f64 + 0.5, (i / self.width) as f64 + 0.5);
            // The pressure field is specified for the left shoe.
            let px = match spec.side {
                Side::Left => x,
                Side::Right => self.width as f64 - x,
            };
            let p = pressure(spec, px, y);
            let tex = 1.0 + spec.wear.texture_amplitude * (2.0 * value_noise(seed, x, y, cell) - 1.0);
            self.rate[i] = (spec.wear.drop_per_year / 52.0 * (spec.wear.base_pressure + p) * tex) as f32;
            self.weight[i] = (0.5 + p) as f32;
        }
    }

    pub fn spec(&self) -> &OutsoleSpec {
        &self.spec
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Block label per pixel: 0 for grooves, the logo and off-sole pixels.
    pub fn block_labels(&self) -> &[u32] {
        &self.block_labels
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn dots(&self) -> &[Dot] {
        &self.dots
    }

    /// Block pairs joined by a shallow bridge that wears away.
    pub fn bridges(&self) -> &[(u32, u32)] {
        &self.bridges
    }

    pub fn relief(&self) -> &[f32] {
        &self.relief
    }

    pub fn rate(&self) -> &[f32] {
        &self.rate
    }

    pub fn sole_mask(&self) -> BinaryMask {
        BinaryMask::from_bits(self.width, self.height, self.sole.clone()).expect("dims")
    }

    pub fn glyph_mask(&self) -> BinaryMask {
        BinaryMask::from_bits(self.width, self.height, self.glyph.clone()).expect("dims")
    }

    /// Logo recess pixels that are not glyphs.
    pub fn pocket_mask(&self) -> BinaryMask {
        BinaryMask::from_bits(self.width, self.height, self.pocket.clone()).expect("dims")
    }

    /// Mean glyph intensity minus mean recess intensity. Works on renders at
    /// this resolution or integer-downsampled ones, using only low-resolution
    /// pixels whose footprint lies entirely in the glyph or the recess.
    pub fn logo_contrast(&self, image: &Image) -> Result<f64> {
        let (w, h) = image.dims();
        if w == 0 || self.width % w != 0 || self.height % h != 0 || self.width / w != self.height / h {
            return Err(Error::shape("logo_contrast", &[self.height, self.width], &[h, w]));
        }
        let f = self.width / w;
        let (mut gs, mut gn, mut ps, mut pn) = (0.0f64, 0usize, 0.0f64, 0usize);
        for y in 0..h {
            for x in 0..w {
                let foot = (0..f).flat_map(|dy| (0..f).map(move |dx| (y * f + dy) * self.width + x * f + dx));
                let (mut all_glyph, mut all_pocket) = (true, true);
                for i in foot {
                    all_glyph &= self.glyph[i];
                    all_pocket &= self.pocket[i];
                }
                let v = image.get(x, y) as f64;
                if all_glyph {
                    gs += v;
                    gn += 1;
                } else if all_pocket {
                    ps += v;
                    pn += 1;
                }
            }
        }
        if gn == 0 || pn == 0 {
            return Err(Error::InvalidArgument("logo is not resolved at this resolution".into()));
        }
        Ok(gs / gn as f64 - ps / pn as f64)
    }

    /// Number of dots whose centre still renders as a recess.
    pub fn visible_dots(&self, image: &Image) -> Result<usize> {
        let f = self.factor_of(image)?;
        Ok(self
            .dots
            .iter()
            .filter(|d| {
                let (x, y) = ((d.x / f as f64) as usize, (d.y / f as f64) as usize);
                (image.get(x, y) as f64) < super::wear::BACKGROUND as f64 + 0.2
            })
            .count())
    }

    fn factor_of(&self, image: &Image) -> Result<usize> {
        let (w, h) = image.dims();
        if self.width % w != 0 || self.height % h != 0 || self.width / w != self.height / h {
            return Err(Error::shape("outsole image", &[self.height, self.width], &[h, w]));
        }
        Ok(self.width / w)
    }

    /// Bridged pairs whose blocks are joined by a path of contact pixels
    /// within their two cells.
    pub fn merged_bridges(&self, contact: &BinaryMask) -> Vec<(u32, u32)> {
        let (w, h) = (self.width, self.height);
        let mut merged = Vec::new();
        for &(a, b) in &self.bridges {
            let (ca, cb) = (a - 1, b - 1);
            let allowed = |i: usize| contact.at(i) && (self.cells[i] == ca || self.cells[i] == cb);
            let mut seen = vec![false; w * h];
            let mut queue: VecDeque<usize> = (0..w * h)
                .filter(|&i| self.block_labels[i] == a && allowed(i))
                .collect();
            for &i in &queue {
                seen[i] = true;
            }
            let mut joined = false;
            while let Some(i) = queue.pop_front() {
                if self.block_labels[i] == b {
                    joined = true;
                    break;
                }
                let (x, y) = (i % w, i / w);
                for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                    for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                        let j = ny * w + nx;
                        if !seen[j] && allowed(j) {
                            seen[j] = true;
                            queue.push_back(j);
                        }
                    }
                }
            }
            if joined {
                merged.push((a, b));
            }
        }
        merged
    }
}
