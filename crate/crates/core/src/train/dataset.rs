use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{Image, Side};
use crate::net::{DeltaEncoding, Variant};

/// One impression of one shoe at one fortnightly week.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpressionRecord {
    pub week: u32,
    pub side: Side,
    pub image: Image,
    pub denoised: bool,
}

impl ImpressionRecord {
    pub fn new(week: u32, side: Side, image: Image, denoised: bool) -> Self {
        ImpressionRecord {
            week,
            side,
            image: image.with_provenance(week, side),
            denoised,
        }
    }
}

/// A training or evaluation triple `{X, Δt, Y}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub x: Image,
    pub delta: DeltaEncoding,
    pub y: Image,
    pub side: Side,
    pub x_week: u32,
    pub y_week: u32,
}

/// Share of distinct weeks used for training.
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

/// Splits records by week.
///
/// The forward model trains on the earliest weeks and the backward model on
/// the latest; the remaining weeks are held out. With 26 fortnightly weeks
/// per side and the default fraction this is weeks 0–42 (forward) or 12–52
/// (backward) for training.
pub fn split_dataset(
    records: &[ImpressionRecord],
    variant: Variant,
    train_fraction: f64,
) -> Result<(Vec<ImpressionRecord>, Vec<ImpressionRecord>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(alloc::format!(
            "train fraction {train_fraction} must lie strictly between 0 and 1"
        )));
    }
    let weeks: Vec<u32> = records.iter().map(|r| r.week).collect::<BTreeSet<_>>().into_iter().collect();
    let n_train = (weeks.len() as f64 * train_fraction + 0.5) as usize;
    if n_train == 0 || n_train >= weeks.len() {
        return Err(Error::Dataset(alloc::format!(
            "{} distinct weeks cannot be split into non-empty train and test partitions",
            weeks.len()
        )));
    }
    let train_weeks: BTreeSet<u32> = match variant {
        Variant::Forward => weeks[..n_train].iter().copied().collect(),
        Variant::Backward => weeks[weeks.len() - n_train..].iter().copied().collect(),
    };
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| (r.week, r.side));
    let (train, test) = sorted.into_iter().partition(|r| train_weeks.contains(&r.week));
    Ok((train, test))
}

fn sample(x: &ImpressionRecord, y: &ImpressionRecord, variant: Variant) -> Result<TrainingSample> {
    let delta = match variant {
        Variant::Forward => DeltaEncoding::scalar(y.week - x.week)?,
        Variant::Backward => DeltaEncoding::one_hot_week(y.week)?,
    };
    Ok(TrainingSample {
        x: x.image.clone(),
        delta,
        y: y.image.clone(),
        side: x.side,
        x_week: x.week,
        y_week: y.week,
    })
}

fn admissible(x: &ImpressionRecord, y: &ImpressionRecord, variant: Variant) -> bool {
    x.side == y.side && (variant == Variant::Backward || x.week <= y.week)
}

/// Every admissible same-side pair within one partition.
///
/// Forward pairs run from an earlier (or the same) week to a later one and
/// carry the displacement. Backward pairs run in either direction and carry
/// the target week.
pub fn make_samples(records: &[ImpressionRecord], variant: Variant) -> Result<Vec<TrainingSample>> {
    let mut out = Vec::new();
    for x in records {
        for y in records {
            if admissible(x, y, variant) {
                out.push(sample(x, y, variant)?);
            }
        }
    }
    Ok(out)
}

/// Evaluation pairs: every target comes from `test`, inputs from either
/// partition.
pub fn make_test_samples(
    train: &[ImpressionRecord],
    test: &[ImpressionRecord],
    variant: Variant,
) -> Result<Vec<TrainingSample>> {
    let mut out = Vec::new();
    for y in test {
        for x in train.iter().chain(test) {
            if admissible(x, y, variant) {
                out.push(sample(x, y, variant)?);
            }
        }
    }
    Ok(out)
}
