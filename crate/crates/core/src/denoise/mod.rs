//! Impression clean-up: local adaptive thresholding, ROI filtering,
//! morphology, a noise map with block labels, and a block-restricted
//! averaging filter.

mod components;
mod mask;
mod morph;
mod pipeline;
mod threshold;

pub use components::{component_areas, label_components, roi_filter};
pub use mask::BinaryMask;
pub use morph::{close, dilate, erode};
pub use pipeline::{build_noise_map, denoise, denoise_image, DenoiseOutcome, DenoiseParams, NoiseMap, REFERENCE_DIMS};
pub use threshold::{adaptive_threshold, adaptive_threshold_with, local_means, Polarity};
