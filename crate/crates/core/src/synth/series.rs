use alloc::vec::Vec;

use super::noise::{add_noise, NoiseSpec};
use super::outsole::generate_outsole;
use super::wear::advance_wear;
use super::{mix, OutsoleSpec};
use crate::denoise::BinaryMask;
use crate::error::Result;
use crate::image::{Image, Side};

/// The one fortnight without an impression.
pub const MISSING_WEEK: u32 = 6;
pub const LAST_WEEK: u32 = 52;

/// Weeks with an impression: every second week from 0 to 52 except
/// [`MISSING_WEEK`].
pub fn series_weeks() -> Vec<u32> {
    (0..=LAST_WEEK).step_by(2).filter(|&w| w != MISSING_WEEK).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRecord {
    pub week: u32,
    pub side: Side,
    pub clean: Image,
    pub noisy: Image,
    /// Pixels the noise changed.
    pub truth: BinaryMask,
}

/// Renders both shoes at every series week, downsampled by `downsample`,
/// with artefacts from `noise` applied at the output resolution.
pub fn generate_series(spec: &OutsoleSpec, noise: &NoiseSpec, downsample: usize) -> Result<Vec<SeriesRecord>> {
    let weeks = series_weeks();
    let mut out = Vec::with_capacity(2 * weeks.len());
    for side in Side::BOTH {
        let outsole = generate_outsole(&spec.for_side(side))?;
        let mut state = outsole.initial_state();
        for &week in &weeks {
            state = advance_wear(&outsole, &state, week - state.week)?;
            let clean = outsole
                .render(&state)?
                .downsample(downsample)?
                .quantized()
                .with_provenance(week, side);
            let seed = mix(spec.seed ^ mix(((week as u64) << 1) | side as u64));
            let (noisy, truth) = add_noise(&clean, noise, seed)?;
            out.push(SeriesRecord {
                week,
                side,
                clean,
                noisy: noisy.with_provenance(week, side),
                truth,
            });
        }
    }
    Ok(out)
}
