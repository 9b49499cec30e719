//! The conditional convolutional auto-encoder.
//!
//! Three branches: an encoder of five strided convolutions over the input
//! impression, a two-layer dense branch that embeds the time displacement and
//! is reshaped to the encoder's spatial grid, and a decoder of five transpose
//! convolutions applied to the channel-wise concatenation of both. Hidden
//! layers use ReLU; the last decoder layer uses a sigmoid.
//!
//! The forward-prediction and reconstruction variants share every code path
//! and differ only in the [`DeltaEncoding`] they accept (and therefore in the
//! input width of the first dense layer).

mod config;
mod delta;
mod model;
mod params;

use core::fmt;
use core::str::FromStr;

pub use config::NetworkConfig;
pub use delta::{DeltaEncoding, MAX_WEEK, ONE_HOT_WIDTH, SCALAR_DELTA_SCALE};
pub use model::Trace;
pub use params::{ModelParams, DELTA_SCALING, INIT_SCHEME};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Wear prediction: scalar displacement, target later than the input.
    Forward,
    /// Reconstruction: one-hot target week, target earlier (or later).
    Backward,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Forward => "forward",
            Variant::Backward => "backward",
        }
    }

    /// Width of the delta branch input vector.
    pub fn delta_width(self) -> usize {
        match self {
            Variant::Forward => 1,
            Variant::Backward => ONE_HOT_WIDTH,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "forward" => Ok(Variant::Forward),
            "backward" => Ok(Variant::Backward),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown variant {other:?} (expected forward or backward)"
            ))),
        }
    }
}
