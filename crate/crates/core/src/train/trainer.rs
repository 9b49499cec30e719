use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::{TrainingSample, DEFAULT_TRAIN_FRACTION};
use crate::error::{Error, Result};
use crate::net::{DeltaEncoding, ModelParams, NetworkConfig, Variant};
use crate::tensor::Tensor;

pub const DEFAULT_LEARNING_RATE: f64 = 1e-5;
pub const DEFAULT_EPOCHS: usize = 10_000;
/// Epoch budget of the 160×64 configuration.
pub const DESK_EPOCHS: usize = 2_000;

const SHUFFLE_SALT: u64 = 0x5eed_5a17_0000_0001;

/// Everything that determines a training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Samples per optimizer step; `None` uses the whole training set.
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub train_fraction: f64,
    /// Checkpoint cadence in epochs; 0 disables periodic checkpoints.
    pub checkpoint_every: usize,
}

impl ExperimentConfig {
    pub fn desk(variant: Variant) -> Self {
        ExperimentConfig {
            network: NetworkConfig::desk(variant),
            learning_rate: DEFAULT_LEARNING_RATE,
            epochs: DESK_EPOCHS,
            batch_size: None,
            seed: 0,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            checkpoint_every: 0,
        }
    }

    pub fn full_scale(variant: Variant) -> Self {
        ExperimentConfig {
            network: NetworkConfig::full_scale(variant),
            epochs: DEFAULT_EPOCHS,
            ..Self::desk(variant)
        }
    }

    pub fn variant(&self) -> Variant {
        self.network.variant
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(alloc::format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epoch count must be positive".into()));
        }
        if self.batch_size == Some(0) {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(alloc::format!(
                "train fraction {} must lie strictly between 0 and 1",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Mean over samples of the summed squared error.
    pub mean_loss: f64,
    /// `mean_loss` divided by the pixel count.
    pub mean_pixel_mse: f64,
    pub checkpoint_due: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams<f32>,
    pub loss_curve: Vec<EpochStats>,
}

struct Prepared {
    x: Tensor<f32>,
    delta: DeltaEncoding,
    y: Tensor<f32>,
}

fn prepare(config: &ExperimentConfig, samples: &[TrainingSample]) -> Result<Vec<Prepared>> {
    if samples.is_empty() {
        return Err(Error::Dataset("no training samples".into()));
    }
    let net = &config.network;
    samples
        .iter()
        .map(|s| {
            if s.delta.variant() != net.variant {
                return Err(Error::VariantMismatch {
                    expected: net.variant.as_str(),
                    found: s.delta.variant().as_str(),
                });
            }
            let dims = (net.input_width, net.input_height);
            if s.x.dims() != dims || s.y.dims() != dims {
                return Err(Error::shape(
                    "training sample",
                    &[net.input_height, net.input_width],
                    &[s.x.height(), s.x.width()],
                ));
            }
            Ok(Prepared {
                x: s.x.to_tensor(),
                delta: s.delta,
                y: s.y.to_tensor(),
            })
        })
        .collect()
}

/// Trains a freshly initialized network.
///
/// `observer` runs after every epoch with the epoch statistics and current
/// parameters; an error from it stops training.
pub fn train<E: From<Error>>(
    config: &ExperimentConfig,
    samples: &[TrainingSample],
    observer: impl FnMut(&EpochStats, &ModelParams<f32>) -> core::result::Result<(), E>,
) -> core::result::Result<TrainOutcome, E> {
    config.validate()?;
    let params = ModelParams::build(config.network, config.seed)?;
    train_from(params, 0, config, samples, observer)
}

/// Continues training `params`, which have already completed
/// `completed_epochs` epochs, up to `config.epochs`.
pub fn train_from<E: From<Error>>(
    mut params: ModelParams<f32>,
    completed_epochs: usize,
    config: &ExperimentConfig,
    samples: &[TrainingSample],
    mut observer: impl FnMut(&EpochStats, &ModelParams<f32>) -> core::result::Result<(), E>,
) -> core::result::Result<TrainOutcome, E> {
    config.validate()?;
    if *params.config() != config.network {
        return Err(Error::Config("parameters were built for a different network configuration".into()).into());
    }
    let data = prepare(config, samples)?;
    let batch = config.batch_size.unwrap_or(data.len()).min(data.len());
    let pixels = (config.network.input_height * config.network.input_width) as f64;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs.saturating_sub(completed_epochs));

    for epoch in completed_epochs + 1..=config.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ SHUFFLE_SALT);
        rng.set_stream(epoch as u64);
        order.sort_unstable();
        order.shuffle(&mut rng);

        let mut total = 0.0f64;
        for chunk in order.chunks(batch) {
            let mut grads = params.zero_grads();
            for &i in chunk {
                let s = &data[i];
                let (loss, g) = params.loss_and_grad(&s.x, &s.delta, &s.y, chunk.len())?;
                let loss = loss as f64 * chunk.len() as f64;
                if !loss.is_finite() {
                    return Err(Error::Divergence(alloc::format!("non-finite loss in epoch {epoch}")).into());
                }
                total += loss;
                for (acc, g) in grads.iter_mut().zip(&g) {
                    acc.add_assign(g)?;
                }
            }
            params.apply_adam(&grads, config.learning_rate)?;
        }

        let mean_loss = total / data.len() as f64;
        let stats = EpochStats {
            epoch,
            mean_loss,
            mean_pixel_mse: mean_loss / pixels,
            checkpoint_due: config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0,
        };
        curve.push(stats);
        observer(&stats, &params)?;
    }
    Ok(TrainOutcome {
        params,
        loss_curve: curve,
    })
}
