use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::LAYERS;
use crate::adam::{adam_step, AdamState};
use crate::error::{Error, Result};
use crate::net::NetworkConfig;
use crate::real::Real;
use crate::tensor::Tensor;

/// Initialization recorded in checkpoints.
pub const INIT_SCHEME: &str = "glorot-uniform; bias zero; chacha8 stream";
/// Scalar displacement preprocessing recorded in checkpoints.
pub const DELTA_SCALING: &str = "delta_weeks / 52";

/// Indices into the flat parameter list.
pub(crate) mod slot {
    pub const ENCODER: usize = 0;
    pub const DELTA: usize = 10;
    pub const DECODER: usize = 14;
    pub const COUNT: usize = 24;

    pub const fn weight(base: usize, layer: usize) -> usize {
        base + 2 * layer
    }

    pub const fn bias(base: usize, layer: usize) -> usize {
        base + 2 * layer + 1
    }
}

/// All learnable tensors of the network plus their Adam state.
///
/// Tensors are kept in a fixed order: five encoder (weight, bias) pairs, two
/// delta-branch pairs, five decoder pairs. [`ModelParams::names`] gives the
/// matching names.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T = f32> {
    config: NetworkConfig,
    seed: u64,
    tensors: Vec<Tensor<T>>,
    adam: Vec<AdamState<T>>,
}

impl<T: Real> ModelParams<T> {
    /// Random initialization, deterministic per `seed`.
    pub fn build(config: NetworkConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors = Self::shapes(&config)?
            .into_iter()
            .enumerate()
            .map(|(i, shape)| {
                if i % 2 == 1 {
                    return Tensor::zeros(&shape);
                }
                let (fan_in, fan_out) = fans(i, &shape);
                let limit = num_traits::Float::sqrt(6.0 / (fan_in + fan_out) as f64);
                Tensor::from_fn(&shape, |_| T::from_f64((2.0 * rng.gen::<f64>() - 1.0) * limit))
            })
            .collect::<Vec<_>>();
        let adam = tensors.iter().map(|t| AdamState::new(t.shape())).collect();
        Ok(ModelParams {
            config,
            seed,
            tensors,
            adam,
        })
    }

    /// Reassembles parameters, e.g. from a checkpoint. Every shape is checked
    /// against `config`.
    pub fn from_parts(config: NetworkConfig, seed: u64, tensors: Vec<Tensor<T>>, adam: Vec<AdamState<T>>) -> Result<Self> {
        config.validate()?;
        let shapes = Self::shapes(&config)?;
        if tensors.len() != shapes.len() || adam.len() != shapes.len() {
            return Err(Error::Config(format!(
                "expected {} parameter tensors, got {} (and {} optimizer states)",
                shapes.len(),
                tensors.len(),
                adam.len()
            )));
        }
        for ((t, a), shape) in tensors.iter().zip(&adam).zip(&shapes) {
            t.ensure_shape("ModelParams::from_parts", shape)?;
            a.first_moment.ensure_shape("ModelParams::from_parts first moment", shape)?;
            a.second_moment.ensure_shape("ModelParams::from_parts second moment", shape)?;
        }
        Ok(ModelParams {
            config,
            seed,
            tensors,
            adam,
        })
    }

    pub fn shapes(config: &NetworkConfig) -> Result<Vec<Vec<usize>>> {
        let mut shapes = Vec::with_capacity(slot::COUNT);
        for spec in config.encoder_specs() {
            shapes.push(spec.conv_weight_shape().to_vec());
            shapes.push(alloc::vec![spec.out_channels]);
        }
        let delta_in = config.variant.delta_width();
        let delta_out = config.delta_output_len()?;
        shapes.push(alloc::vec![config.delta_hidden, delta_in]);
        shapes.push(alloc::vec![config.delta_hidden]);
        shapes.push(alloc::vec![delta_out, config.delta_hidden]);
        shapes.push(alloc::vec![delta_out]);
        for spec in config.decoder_specs() {
            shapes.push(spec.tconv_weight_shape().to_vec());
            shapes.push(alloc::vec![spec.out_channels]);
        }
        Ok(shapes)
    }

    pub fn names() -> Vec<String> {
        let mut names = Vec::with_capacity(slot::COUNT);
        for (prefix, count) in [("encoder", LAYERS), ("delta", 2), ("decoder", LAYERS)] {
            for layer in 1..=count {
                names.push(format!("{prefix}.{layer}.weight"));
                names.push(format!("{prefix}.{layer}.bias"));
            }
        }
        names
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tensors(&self) -> &[Tensor<T>] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.tensors
    }

    pub fn adam_states(&self) -> &[AdamState<T>] {
        &self.adam
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn zero_grads(&self) -> Vec<Tensor<T>> {
        self.tensors.iter().map(Tensor::zeros_like).collect()
    }

    /// One Adam step on every tensor.
    ///
    /// All gradients are checked before any tensor moves, so a divergence
    /// error leaves the parameters untouched.
    pub fn apply_adam(&mut self, grads: &[Tensor<T>], lr: f64) -> Result<()> {
        if grads.len() != self.tensors.len() {
            return Err(Error::InvalidArgument(format!(
                "{} gradients for {} parameter tensors",
                grads.len(),
                self.tensors.len()
            )));
        }
        let names = Self::names();
        for (g, name) in grads.iter().zip(&names) {
            if !g.all_finite() {
                return Err(Error::Divergence(format!("non-finite gradient for {name}")));
            }
        }
        for ((p, g), s) in self.tensors.iter_mut().zip(grads).zip(&mut self.adam) {
            adam_step(p, g, s, lr)?;
        }
        Ok(())
    }

    /// Converts the element type, e.g. to run an `f32` model in `f64`.
    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        ModelParams {
            config: self.config,
            seed: self.seed,
            tensors: self.tensors.iter().map(Tensor::cast).collect(),
            adam: self
                .adam
                .iter()
                .map(|a| AdamState {
                    step_count: a.step_count,
                    first_moment: a.first_moment.cast(),
                    second_moment: a.second_moment.cast(),
                    beta1: a.beta1,
                    beta2: a.beta2,
                    epsilon: a.epsilon,
                })
                .collect(),
        }
    }
}

fn fans(index: usize, shape: &[usize]) -> (usize, usize) {
    match *shape {
        // conv [out, in, kh, kw] and tconv [in, out, kh, kw]: the receptive
        // field multiplies both fans, and the sum is symmetric in in/out.
        [a, b, kh, kw] => {
            let rf = kh * kw;
            if index >= slot::DECODER {
                (a * rf, b * rf)
            } else {
                (b * rf, a * rf)
            }
        }
        [out, inp] => (inp, out),
        _ => unreachable!("weights are 2-D or 4-D"),
    }
}
