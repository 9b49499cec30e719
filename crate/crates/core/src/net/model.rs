use alloc::vec::Vec;

use super::config::LAYERS;
use super::params::slot;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::net::{DeltaEncoding, ModelParams};
use crate::ops::{
    concat_channels, conv2d_backward, conv2d_forward, dense_backward, dense_forward, mse_loss, relu,
    relu_backward, sigmoid, sigmoid_backward, split_channels, tconv2d_backward, tconv2d_forward,
};
use crate::real::Real;
use crate::tensor::Tensor;

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    /// Encoder input followed by the five post-ReLU encoder outputs.
    encoder: Vec<Tensor<T>>,
    delta_input: Tensor<T>,
    delta_hidden: Tensor<T>,
    delta_output: Tensor<T>,
    /// Concatenated decoder input followed by the five decoder outputs; the
    /// last one is the sigmoid output.
    decoder: Vec<Tensor<T>>,
}

impl<T: Real> Trace<T> {
    pub fn output(&self) -> &Tensor<T> {
        self.decoder.last().expect("decoder trace is never empty")
    }

    pub fn into_output(mut self) -> Tensor<T> {
        self.decoder.pop().expect("decoder trace is never empty")
    }

    /// Post-ReLU encoder features, `[C5, H/32, W/32]`.
    pub fn encoding(&self) -> &Tensor<T> {
        &self.encoder[LAYERS]
    }

    /// On/off state of every ReLU unit, in a fixed order.
    pub fn relu_states(&self) -> Vec<bool> {
        let relu_outputs = self.encoder[1..]
            .iter()
            .chain([&self.delta_hidden, &self.delta_output])
            .chain(&self.decoder[1..LAYERS]);
        relu_outputs
            .flat_map(|t| t.data().iter().map(|&v| v > T::zero()))
            .collect()
    }
}

impl<T: Real> ModelParams<T> {
    fn weight(&self, base: usize, layer: usize) -> &Tensor<T> {
        &self.tensors()[slot::weight(base, layer)]
    }

    fn bias(&self, base: usize, layer: usize) -> &Tensor<T> {
        &self.tensors()[slot::bias(base, layer)]
    }

    fn check_delta(&self, delta: &DeltaEncoding) -> Result<()> {
        delta.validate()?;
        if delta.variant() != self.config().variant {
            return Err(Error::VariantMismatch {
                expected: self.config().variant.as_str(),
                found: delta.variant().as_str(),
            });
        }
        Ok(())
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<()> {
        let cfg = self.config();
        x.ensure_shape("network input", &[1, cfg.input_height, cfg.input_width])
    }

    /// Encoder branch: five strided convolutions with ReLU.
    pub fn encode(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.check_input(x)?;
        let mut h = x.clone();
        for (layer, spec) in self.config().encoder_specs().iter().enumerate() {
            h = relu(&conv2d_forward(&h, spec, self.weight(slot::ENCODER, layer), self.bias(slot::ENCODER, layer))?);
        }
        Ok(h)
    }

    /// Delta branch: two dense layers with ReLU, reshaped to
    /// `[delta_channels, H/32, W/32]`.
    pub fn encode_delta(&self, delta: &DeltaEncoding) -> Result<Tensor<T>> {
        self.check_delta(delta)?;
        let (_, _, out) = self.delta_branch(delta)?;
        self.reshape_delta(out)
    }

    fn delta_branch(&self, delta: &DeltaEncoding) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
        let input = delta.to_vector::<T>()?;
        let hidden = relu(&dense_forward(&input, self.weight(slot::DELTA, 0), self.bias(slot::DELTA, 0))?);
        let out = relu(&dense_forward(&hidden, self.weight(slot::DELTA, 1), self.bias(slot::DELTA, 1))?);
        Ok((input, hidden, out))
    }

    fn reshape_delta(&self, flat: Tensor<T>) -> Result<Tensor<T>> {
        let (_, h, w) = self.config().encoder_output_shape()?;
        flat.reshape(&[self.config().delta_channels, h, w])
    }

    /// Full forward pass on a `[1, H, W]` tensor, keeping activations.
    pub fn forward_traced(&self, x: &Tensor<T>, delta: &DeltaEncoding) -> Result<Trace<T>> {
        self.check_input(x)?;
        self.check_delta(delta)?;

        let mut encoder = Vec::with_capacity(LAYERS + 1);
        encoder.push(x.clone());
        for (layer, spec) in self.config().encoder_specs().iter().enumerate() {
            let z = conv2d_forward(&encoder[layer], spec, self.weight(slot::ENCODER, layer), self.bias(slot::ENCODER, layer))?;
            encoder.push(relu(&z));
        }

        let (delta_input, delta_hidden, delta_output) = self.delta_branch(delta)?;
        let g = self.reshape_delta(delta_output.clone())?;

        let mut decoder = Vec::with_capacity(LAYERS + 1);
        decoder.push(concat_channels(&encoder[LAYERS], &g)?);
        for (layer, spec) in self.config().decoder_specs().iter().enumerate() {
            let z = tconv2d_forward(&decoder[layer], spec, self.weight(slot::DECODER, layer), self.bias(slot::DECODER, layer))?;
            decoder.push(if layer + 1 == LAYERS { sigmoid(&z) } else { relu(&z) });
        }

        Ok(Trace {
            encoder,
            delta_input,
            delta_hidden,
            delta_output,
            decoder,
        })
    }

    pub fn forward_tensor(&self, x: &Tensor<T>, delta: &DeltaEncoding) -> Result<Tensor<T>> {
        Ok(self.forward_traced(x, delta)?.into_output())
    }

    /// Predicts the impression for `delta`; the result has the input's
    /// dimensions and values strictly inside (0, 1).
    pub fn forward(&self, image: &Image, delta: &DeltaEncoding) -> Result<Image> {
        let out = self.forward_tensor(&image.to_tensor(), delta)?;
        Image::from_tensor(&out)
    }

    /// Gradients of a scalar loss with respect to every parameter, given the
    /// loss gradient at the network output. Ordered like
    /// [`ModelParams::tensors`].
    pub fn backward(&self, trace: &Trace<T>, grad_output: &Tensor<T>) -> Result<Vec<Tensor<T>>> {
        grad_output.ensure_shape("backward grad_output", trace.output().shape())?;
        let mut grads: Vec<Option<Tensor<T>>> = (0..slot::COUNT).map(|_| None).collect();
        let dec_specs = self.config().decoder_specs();
        let enc_specs = self.config().encoder_specs();

        let mut g = sigmoid_backward(grad_output, trace.output())?;
        for layer in (0..LAYERS).rev() {
            let input = &trace.decoder[layer];
            let cg = tconv2d_backward(&g, input, &dec_specs[layer], self.weight(slot::DECODER, layer))?;
            grads[slot::weight(slot::DECODER, layer)] = Some(cg.weights);
            grads[slot::bias(slot::DECODER, layer)] = Some(cg.bias);
            g = if layer > 0 { relu_backward(&cg.input, input)? } else { cg.input };
        }

        let c5 = self.config().encoder_channels[LAYERS - 1];
        let (g_enc, g_delta) = split_channels(&g, c5)?;

        let g_delta = g_delta.reshape(&[trace.delta_output.len()])?;
        let g_delta = relu_backward(&g_delta, &trace.delta_output)?;
        let dg = dense_backward(&g_delta, &trace.delta_hidden, self.weight(slot::DELTA, 1))?;
        grads[slot::weight(slot::DELTA, 1)] = Some(dg.weights);
        grads[slot::bias(slot::DELTA, 1)] = Some(dg.bias);
        let g_hidden = relu_backward(&dg.input, &trace.delta_hidden)?;
        let dg = dense_backward(&g_hidden, &trace.delta_input, self.weight(slot::DELTA, 0))?;
        grads[slot::weight(slot::DELTA, 0)] = Some(dg.weights);
        grads[slot::bias(slot::DELTA, 0)] = Some(dg.bias);

        let mut g = g_enc;
        for layer in (0..LAYERS).rev() {
            g = relu_backward(&g, &trace.encoder[layer + 1])?;
            let cg = conv2d_backward(&g, &trace.encoder[layer], &enc_specs[layer], self.weight(slot::ENCODER, layer))?;
            grads[slot::weight(slot::ENCODER, layer)] = Some(cg.weights);
            grads[slot::bias(slot::ENCODER, layer)] = Some(cg.bias);
            g = cg.input;
        }

        Ok(grads.into_iter().map(|g| g.expect("every slot is filled")).collect())
    }

    /// Squared-error loss of one `{X, Δt, Y}` sample, scaled for a batch of
    /// `batch_size`, and its parameter gradients.
    pub fn loss_and_grad(
        &self,
        x: &Tensor<T>,
        delta: &DeltaEncoding,
        y: &Tensor<T>,
        batch_size: usize,
    ) -> Result<(T, Vec<Tensor<T>>)> {
        let trace = self.forward_traced(x, delta)?;
        let (loss, grad) = mse_loss(trace.output(), y, batch_size)?;
        Ok((loss, self.backward(&trace, &grad)?))
    }
}
