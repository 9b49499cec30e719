use alloc::vec::Vec;

use super::outsole::{Outsole, TOP};
use crate::denoise::BinaryMask;
use crate::error::{Error, Result};
use crate::image::Image;

/// Gel background level of a rendered impression.
pub const BACKGROUND: f32 = 0.15;
const INK_BASE: f64 = 0.55;
const INK_GAIN: f64 = 0.35;
/// Plane drop at which contact ink saturates.
const INK_FULL_DROP: f64 = 4.0;
/// Height below the contact plane still printed, before pressure weighting.
const CONTACT_TOLERANCE: f64 = 0.25;
/// Material thinner than this leaves no mark.
const MIN_MATERIAL: f64 = 0.05;

/// Remaining material per pixel after `week` weeks of wear.
#[derive(Debug, Clone, PartialEq)]
pub struct WearState {
    pub week: u32,
    width: usize,
    height: usize,
    depth: Vec<f32>,
}

impl WearState {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn depth(&self) -> &[f32] {
        &self.depth
    }
}

fn check_weeks(weeks: u32) -> Result<()> {
    if weeks % 2 != 0 {
        return Err(Error::InvalidArgument(alloc::format!("{weeks} weeks is not a whole number of fortnights")));
    }
    Ok(())
}

impl Outsole {
    /// Height of the contact plane at pixel `i`.
    fn plane(&self, i: usize, week: u32) -> f32 {
        (TOP - self.rate[i] as f64 * week as f64).max(0.0) as f32
    }

    pub fn initial_state(&self) -> WearState {
        WearState {
            week: 0,
            width: self.width,
            height: self.height,
            depth: self.relief.iter().map(|&r| r.max(0.0)).collect(),
        }
    }

    pub fn state_at(&self, week: u32) -> Result<WearState> {
        advance_wear(self, &self.initial_state(), week)
    }

    /// Pixels printing at least half of full contact.
    pub fn contact_mask(&self, state: &WearState) -> BinaryMask {
        let bits = (0..self.width * self.height).map(|i| self.contact(state, i) >= 0.5).collect();
        BinaryMask::from_bits(self.width, self.height, bits).expect("dims")
    }

    fn contact(&self, state: &WearState, i: usize) -> f64 {
        let d = state.depth[i] as f64;
        if !self.sole[i] || d <= MIN_MATERIAL {
            return 0.0;
        }
        let gap = self.plane(i, state.week) as f64 - d;
        (1.0 - gap / (CONTACT_TOLERANCE * self.weight[i] as f64)).clamp(0.0, 1.0)
    }

    /// 256-level impression of `state`: material within a pressure-weighted
    /// tolerance of the contact plane prints, brighter as the tread
    /// flattens.
    pub fn render(&self, state: &WearState) -> Result<Image> {
        if state.dims() != (self.width, self.height) {
            return Err(Error::shape(
                "render",
                &[self.height, self.width],
                &[state.height, state.width],
            ));
        }
        let bg = BACKGROUND as f64;
        let img = Image::from_fn(self.width, self.height, |x, y| {
            let i = y * self.width + x;
            let c = self.contact(state, i);
            let drop = self.rate[i] as f64 * state.week as f64;
            let ink = INK_BASE + INK_GAIN * (drop / INK_FULL_DROP).min(1.0);
            (bg + c * (ink - bg)) as f32
        });
        Ok(img.quantized())
    }
}

/// Wears `state` for a further `weeks` (even) weeks. Advancing by `a` then
/// `b` equals advancing by `a + b` exactly.
pub fn advance_wear(outsole: &Outsole, state: &WearState, weeks: u32) -> Result<WearState> {
    check_weeks(weeks)?;
    if state.dims() != outsole.dims() {
        return Err(Error::shape(
            "advance_wear",
            &[outsole.height, outsole.width],
            &[state.height, state.width],
        ));
    }
    let week = state.week + weeks;
    let depth = state
        .depth
        .iter()
        .enumerate()
        .map(|(i, &d)| d.min(outsole.plane(i, week)))
        .collect();
    Ok(WearState {
        week,
        width: state.width,
        height: state.height,
        depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_outsole, OutsoleSpec};

    fn outsole() -> Outsole {
        generate_outsole(&OutsoleSpec::with_seed(1)).unwrap()
    }

    #[test]
    fn zero_weeks_is_identity_and_odd_weeks_fail() {
        let o = outsole();
        let s = o.state_at(10).unwrap();
        assert_eq!(advance_wear(&o, &s, 0).unwrap(), s);
        assert!(matches!(advance_wear(&o, &s, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn advancing_is_a_semigroup() {
        let o = outsole();
        let s0 = o.initial_state();
        for (a, b) in [(2, 4), (10, 30), (26, 26), (0, 52)] {
            let split = advance_wear(&o, &advance_wear(&o, &s0, a).unwrap(), b).unwrap();
            assert_eq!(split, advance_wear(&o, &s0, a + b).unwrap(), "{a}+{b}");
        }
    }

    #[test]
    fn erosion_is_monotone() {
        let o = outsole();
        let mut prev = o.initial_state();
        for _ in 0..26 {
            let next = advance_wear(&o, &prev, 2).unwrap();
            assert!(next.depth().iter().zip(prev.depth()).all(|(n, p)| n <= p));
            prev = next;
        }
    }

    #[test]
    fn blocks_merge_dots_fade_and_logo_appears() {
        let o = outsole();
        let (mut dots, mut contrast) = (usize::MAX, -1.0);
        for week in (0..=52).step_by(4) {
            let s = o.state_at(week).unwrap();
            let img = o.render(&s).unwrap();
            let d = o.visible_dots(&img).unwrap();
            let c = o.logo_contrast(&img).unwrap();
            assert!(d <= dots, "week {week}");
            assert!(c >= contrast - 0.01, "week {week}: {c} < {contrast}");
            (dots, contrast) = (d, c);
        }
        let last = o.state_at(52).unwrap();
        assert!(!o.merged_bridges(&o.contact_mask(&last)).is_empty());
        assert!(o.merged_bridges(&o.contact_mask(&o.initial_state())).is_empty());
        assert!(dots < o.dots().len());
        assert!(contrast > 0.2);
    }

    #[test]
    fn fully_eroded_sole_renders_background() {
        let o = outsole();
        let s = o.state_at(1000).unwrap();
        let img = o.render(&s).unwrap();
        let bg = crate::image::level_to_unit(crate::image::unit_to_level(BACKGROUND));
        assert!(img.pixels().iter().all(|&v| v == bg));
    }
}
