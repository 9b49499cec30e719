use crate::error::{Error, Result};
use crate::net::Variant;
use crate::real::Real;
use crate::tensor::Tensor;

/// Length of the one-hot week vector.
pub const ONE_HOT_WIDTH: usize = 52;
/// Largest displacement / target week accepted.
pub const MAX_WEEK: u32 = 52;
/// Scalar displacements are divided by this before entering the network.
pub const SCALAR_DELTA_SCALE: f64 = 52.0;

/// Temporal conditioning input.
///
/// Weeks are fortnightly, so every value is even. One-hot slots map
/// `week ↦ week / 2`: week 0 is slot 0, weeks 2..=52 are slots 1..=26, and
/// slots 27..=51 are never produced by [`DeltaEncoding::one_hot_week`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeltaEncoding {
    /// Displacement in weeks, `Δt ∈ {0, 2, …, 52}`.
    Scalar(u32),
    /// Index of the single hot element of the 52-element vector.
    OneHot { slot: usize },
}

impl DeltaEncoding {
    pub fn scalar(weeks: u32) -> Result<Self> {
        check_week(weeks)?;
        Ok(DeltaEncoding::Scalar(weeks))
    }

    pub fn one_hot_week(week: u32) -> Result<Self> {
        check_week(week)?;
        Ok(DeltaEncoding::OneHot {
            slot: (week / 2) as usize,
        })
    }

    /// Validates a raw logical vector: 52 elements, each 0 or 1, exactly one 1.
    pub fn from_one_hot(vector: &[f32]) -> Result<Self> {
        if vector.len() != ONE_HOT_WIDTH {
            return Err(Error::Delta(alloc::format!(
                "one-hot vector has {} elements, expected {ONE_HOT_WIDTH}",
                vector.len()
            )));
        }
        if let Some(bad) = vector.iter().find(|&&v| v != 0.0 && v != 1.0) {
            return Err(Error::Delta(alloc::format!("one-hot element {bad} is not 0 or 1")));
        }
        let hot: alloc::vec::Vec<usize> = (0..ONE_HOT_WIDTH).filter(|&i| vector[i] == 1.0).collect();
        match hot.as_slice() {
            [slot] => Ok(DeltaEncoding::OneHot { slot: *slot }),
            _ => Err(Error::Delta(alloc::format!(
                "one-hot vector has {} hot elements, expected exactly one",
                hot.len()
            ))),
        }
    }

    pub fn slot_for_week(week: u32) -> Option<usize> {
        check_week(week).ok().map(|_| (week / 2) as usize)
    }

    pub fn week_for_slot(slot: usize) -> Option<u32> {
        (slot <= (MAX_WEEK / 2) as usize).then_some(slot as u32 * 2)
    }

    pub fn variant(&self) -> Variant {
        match self {
            DeltaEncoding::Scalar(_) => Variant::Forward,
            DeltaEncoding::OneHot { .. } => Variant::Backward,
        }
    }

    /// The week count this encoding carries: the displacement for
    /// [`DeltaEncoding::Scalar`], the target week for
    /// [`DeltaEncoding::OneHot`] (if the slot maps to one).
    pub fn weeks(&self) -> Option<u32> {
        match *self {
            DeltaEncoding::Scalar(w) => Some(w),
            DeltaEncoding::OneHot { slot } => Self::week_for_slot(slot),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DeltaEncoding::Scalar(w) => check_week(w),
            DeltaEncoding::OneHot { slot } if slot < ONE_HOT_WIDTH => Ok(()),
            DeltaEncoding::OneHot { slot } => Err(Error::Delta(alloc::format!(
                "slot {slot} outside the {ONE_HOT_WIDTH}-element vector"
            ))),
        }
    }

    /// The network input vector.
    pub fn to_vector<T: Real>(&self) -> Result<Tensor<T>> {
        self.validate()?;
        Ok(match *self {
            DeltaEncoding::Scalar(w) => Tensor::full(&[1], T::from_f64(w as f64 / SCALAR_DELTA_SCALE)),
            DeltaEncoding::OneHot { slot } => {
                let mut v = Tensor::zeros(&[ONE_HOT_WIDTH]);
                v.data_mut()[slot] = T::one();
                v
            }
        })
    }
}

fn check_week(week: u32) -> Result<()> {
    if week > MAX_WEEK {
        return Err(Error::Delta(alloc::format!("{week} weeks exceeds the maximum of {MAX_WEEK}")));
    }
    if week % 2 != 0 {
        return Err(Error::Delta(alloc::format!("{week} is odd; weeks advance in steps of 2")));
    }
    Ok(())
}
