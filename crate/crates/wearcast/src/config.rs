//! Run configuration: TOML file, then command-line overrides.
//!
//! ```toml
//! seed = 7
//!
//! [train]
//! variant = "forward"
//! learning_rate = 1e-3
//! epochs = 300
//! batch_size = 16
//!
//! [denoise]
//! window = 35
//! ```
//!
//! Every key is optional; missing keys take the defaults below.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wearcast_core::denoise::{DenoiseParams, Polarity};
use wearcast_core::synth::{NoiseSpec, OutsoleSpec};
use wearcast_core::train::{ExperimentConfig, DEFAULT_LEARNING_RATE, DEFAULT_TRAIN_FRACTION, DESK_EPOCHS};
use wearcast_core::{NetworkConfig, Variant};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub generate: GenerateSection,
    pub denoise: DenoiseSection,
    pub train: TrainSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    /// Integer factor between the 640×256 render and the written files.
    pub downsample: usize,
    pub block_count: usize,
    /// Scales every artefact count; 0 writes noise-free "noisy" files.
    pub noise_intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseSection {
    pub window: usize,
    pub offset: f64,
    pub min_area: usize,
    pub dilation_radius: usize,
    pub kernel: usize,
    /// "dark" (debris darker than the background) or "bright".
    pub polarity: String,
    pub background_passes: usize,
    pub background_band: f64,
    pub print_margin: f64,
    /// Align each impression to the first week of its side before
    /// denoising.
    pub register: bool,
    pub max_shift: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub variant: String,
    pub learning_rate: f64,
    pub epochs: usize,
    /// 0 trains full-batch.
    pub batch_size: usize,
    pub train_fraction: f64,
    pub checkpoint_every: usize,
    pub input_height: usize,
    pub input_width: usize,
    pub base_channels: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            generate: GenerateSection::default(),
            denoise: DenoiseSection::default(),
            train: TrainSection::default(),
        }
    }
}

impl Default for GenerateSection {
    fn default() -> Self {
        GenerateSection {
            downsample: 1,
            block_count: OutsoleSpec::default().block_count,
            noise_intensity: 1.0,
        }
    }
}

impl Default for DenoiseSection {
    fn default() -> Self {
        let d = DenoiseParams::default();
        DenoiseSection {
            window: d.window,
            offset: d.offset,
            min_area: d.min_area,
            dilation_radius: d.dilation_radius,
            kernel: d.kernel,
            polarity: "dark".into(),
            background_passes: d.background_passes,
            background_band: d.background_band,
            print_margin: d.print_margin,
            register: false,
            max_shift: 8,
        }
    }
}

impl Default for TrainSection {
    fn default() -> Self {
        let n = NetworkConfig::desk(Variant::Forward);
        TrainSection {
            variant: "forward".into(),
            learning_rate: DEFAULT_LEARNING_RATE,
            epochs: DESK_EPOCHS,
            batch_size: 0,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            checkpoint_every: 100,
            input_height: n.input_height,
            input_width: n.input_width,
            base_channels: n.encoder_channels[0],
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|reason| Error::format(path, reason))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn outsole_spec(&self) -> OutsoleSpec {
        OutsoleSpec {
            block_count: self.generate.block_count,
            ..OutsoleSpec::with_seed(self.seed)
        }
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        let (w, h) = (OutsoleSpec::default().width, OutsoleSpec::default().height);
        let d = self.generate.downsample.max(1);
        NoiseSpec {
            intensity: self.generate.noise_intensity,
            ..NoiseSpec::for_dims(w / d, h / d)
        }
    }

    pub fn denoise_params(&self) -> Result<DenoiseParams> {
        let d = &self.denoise;
        let polarity = match d.polarity.as_str() {
            "dark" => Polarity::Dark,
            "bright" => Polarity::Bright,
            other => return Err(Error::Usage(format!("unknown polarity {other:?} (expected dark or bright)"))),
        };
        let p = DenoiseParams {
            window: d.window,
            offset: d.offset,
            min_area: d.min_area,
            dilation_radius: d.dilation_radius,
            kernel: d.kernel,
            polarity,
            background_passes: d.background_passes,
            background_band: d.background_band,
            print_margin: d.print_margin,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn variant(&self) -> Result<Variant> {
        self.train
            .variant
            .parse()
            .map_err(|_| Error::Usage(format!("unknown variant {:?} (expected forward or backward)", self.train.variant)))
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let t = &self.train;
        let variant = self.variant()?;
        let network = NetworkConfig::scaled(variant, t.input_height, t.input_width, t.base_channels);
        let config = ExperimentConfig {
            network: NetworkConfig {
                delta_hidden: NetworkConfig::desk(variant).delta_hidden,
                delta_channels: NetworkConfig::desk(variant).delta_channels,
                ..network
            },
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            batch_size: (t.batch_size > 0).then_some(t.batch_size),
            seed: self.seed,
            train_fraction: t.train_fraction,
            checkpoint_every: t.checkpoint_every,
        };
        config.validate()?;
        Ok(config)
    }
}
