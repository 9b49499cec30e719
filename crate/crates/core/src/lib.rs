//! Numerical core for temporal outsole-wear modelling.
//!
//! The crate is `no_std` (with `alloc`) and holds everything that is pure
//! computation:
//!
//! * [`tensor`] and [`ops`]: dense tensors and the layer primitives with hand
//!   written backward passes, plus [`adam`].
//! * [`net`]: the three-branch conditional auto-encoder (image encoder, time
//!   displacement branch, transpose-convolution decoder).
//! * [`train`]: dataset splitting, `{X, Δt, Y}` sample construction and the
//!   training loop.
//! * [`denoise`]: thresholding, connected components, morphology and the
//!   block-restricted averaging filter used to clean impressions.
//! * [`synth`]: a seeded generator of fortnightly outsole impressions with
//!   monotone wear, used as ground truth.
//! * [`metrics`]: SSIM, PSNR and table-style evaluation reports.
//!
//! File formats, checkpoint IO and the command-line tool live in the
//! `wearcast` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adam;
pub mod denoise;
pub mod error;
pub mod gradcheck;
pub mod image;
pub mod metrics;
pub mod net;
pub mod ops;
pub mod real;
pub mod synth;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use image::{Image, Side};
pub use net::{DeltaEncoding, ModelParams, NetworkConfig, Variant};
pub use real::Real;
pub use tensor::Tensor;
