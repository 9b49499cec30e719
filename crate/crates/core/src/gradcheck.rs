//! Central finite-difference verification of every backward pass, run in
//! `f64`. Used by the `gradcheck` command.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::net::{DeltaEncoding, ModelParams, NetworkConfig, Variant};
use crate::ops::{self, ConvSpec};
use crate::tensor::Tensor;

pub const STEP: f64 = 1e-5;
pub const LAYER_TOLERANCE: f64 = 1e-5;
pub const NETWORK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub name: String,
    pub max_relative_error: f64,
    pub checked: usize,
    /// Entries excluded because a ReLU switched state inside the
    /// finite-difference interval.
    pub skipped: usize,
    pub tolerance: f64,
}

impl GradCheck {
    pub fn passed(&self) -> bool {
        self.max_relative_error < self.tolerance && self.checked > 0
    }
}

/// Largest entrywise deviation relative to the largest gradient entry,
/// `‖a − n‖∞ / max(‖a‖∞, ‖n‖∞)`.
///
/// Entries of a gradient can be many orders of magnitude below the largest
/// one, where a plain entrywise ratio measures only finite-difference
/// rounding noise.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic
        .iter()
        .zip(numeric)
        .fold(0.0f64, |m, (a, n)| m.max((a - n).abs()));
    let scale = analytic
        .iter()
        .chain(numeric)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn random(rng: &mut ChaCha8Rng, shape: &[usize], scale: f64) -> Tensor<f64> {
    Tensor::from_fn(shape, |_| (2.0 * rng.gen::<f64>() - 1.0) * scale)
}

/// Checks `analytic` against central differences of `f` around `x`.
fn compare(
    name: &str,
    tolerance: f64,
    x: &Tensor<f64>,
    analytic: &Tensor<f64>,
    mut f: impl FnMut(&Tensor<f64>) -> f64,
) -> GradCheck {
    let mut probe = x.clone();
    let mut numeric = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + STEP;
        let up = f(&probe);
        probe.data_mut()[i] = orig - STEP;
        let down = f(&probe);
        probe.data_mut()[i] = orig;
        numeric.push((up - down) / (2.0 * STEP));
    }
    GradCheck {
        name: name.to_string(),
        max_relative_error: relative_error(analytic.data(), &numeric),
        checked: x.len(),
        skipped: 0,
        tolerance,
    }
}

fn project(out: &Tensor<f64>, r: &Tensor<f64>) -> f64 {
    out.dot(r).expect("projection shapes agree")
}

/// Finite-difference checks of every layer primitive on small random
/// tensors.
pub fn layer_suite(seed: u64) -> Result<Vec<GradCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let spec = ConvSpec::square(2, 3, 3, 2, 1);
    let x = random(&mut rng, &[2, 7, 6], 1.0);
    let w = random(&mut rng, &spec.conv_weight_shape(), 0.5);
    let b = random(&mut rng, &[3], 0.5);
    let out = ops::conv2d_forward(&x, &spec, &w, &b)?;
    let r = random(&mut rng, out.shape(), 1.0);
    let g = ops::conv2d_backward(&r, &x, &spec, &w)?;
    let tol = LAYER_TOLERANCE;
    checks.push(compare("conv2d input", tol, &x, &g.input, |p| {
        project(&ops::conv2d_forward(p, &spec, &w, &b).unwrap(), &r)
    }));
    checks.push(compare("conv2d weights", tol, &w, &g.weights, |p| {
        project(&ops::conv2d_forward(&x, &spec, p, &b).unwrap(), &r)
    }));
    checks.push(compare("conv2d bias", tol, &b, &g.bias, |p| {
        project(&ops::conv2d_forward(&x, &spec, &w, p).unwrap(), &r)
    }));

    let spec = ConvSpec::square(3, 2, 4, 2, 1);
    let x = random(&mut rng, &[3, 4, 3], 1.0);
    let w = random(&mut rng, &spec.tconv_weight_shape(), 0.5);
    let b = random(&mut rng, &[2], 0.5);
    let out = ops::tconv2d_forward(&x, &spec, &w, &b)?;
    let r = random(&mut rng, out.shape(), 1.0);
    let g = ops::tconv2d_backward(&r, &x, &spec, &w)?;
    checks.push(compare("tconv2d input", tol, &x, &g.input, |p| {
        project(&ops::tconv2d_forward(p, &spec, &w, &b).unwrap(), &r)
    }));
    checks.push(compare("tconv2d weights", tol, &w, &g.weights, |p| {
        project(&ops::tconv2d_forward(&x, &spec, p, &b).unwrap(), &r)
    }));
    checks.push(compare("tconv2d bias", tol, &b, &g.bias, |p| {
        project(&ops::tconv2d_forward(&x, &spec, &w, p).unwrap(), &r)
    }));

    let x = random(&mut rng, &[5], 1.0);
    let w = random(&mut rng, &[4, 5], 0.5);
    let b = random(&mut rng, &[4], 0.5);
    let r = random(&mut rng, &[4], 1.0);
    let g = ops::dense_backward(&r, &x, &w)?;
    let tol = 1e-6;
    checks.push(compare("dense input", tol, &x, &g.input, |p| {
        project(&ops::dense_forward(p, &w, &b).unwrap(), &r)
    }));
    checks.push(compare("dense weights", tol, &w, &g.weights, |p| {
        project(&ops::dense_forward(&x, p, &b).unwrap(), &r)
    }));
    checks.push(compare("dense bias", tol, &b, &g.bias, |p| {
        project(&ops::dense_forward(&x, &w, p).unwrap(), &r)
    }));

    // Keep ReLU inputs away from the kink.
    let x = Tensor::from_fn(&[16], |_| {
        let m = 0.05 + rng.gen::<f64>();
        if rng.gen::<bool>() {
            m
        } else {
            -m
        }
    });
    let r = random(&mut rng, &[16], 1.0);
    let g = ops::relu_backward(&r, &x)?;
    checks.push(compare("relu", LAYER_TOLERANCE, &x, &g, |p| project(&ops::relu(p), &r)));

    let x = random(&mut rng, &[16], 4.0);
    let s = ops::sigmoid(&x);
    let g = ops::sigmoid_backward(&r, &s)?;
    checks.push(compare("sigmoid", LAYER_TOLERANCE, &x, &g, |p| project(&ops::sigmoid(p), &r)));

    let a = random(&mut rng, &[2, 3, 2], 1.0);
    let c = random(&mut rng, &[3, 3, 2], 1.0);
    let r = random(&mut rng, &[5, 3, 2], 1.0);
    let (ga, gc) = ops::split_channels(&r, 2)?;
    checks.push(compare("concat first", LAYER_TOLERANCE, &a, &ga, |p| {
        project(&ops::concat_channels(p, &c).unwrap(), &r)
    }));
    checks.push(compare("concat second", LAYER_TOLERANCE, &c, &gc, |p| {
        project(&ops::concat_channels(&a, p).unwrap(), &r)
    }));

    let pred = random(&mut rng, &[1, 4, 3], 1.0);
    let target = random(&mut rng, &[1, 4, 3], 1.0);
    let (_, g) = ops::mse_loss(&pred, &target, 3)?;
    checks.push(compare("mse", 1e-6, &pred, &g, |p| ops::mse_loss(p, &target, 3).unwrap().0));

    Ok(checks)
}

/// End-to-end check of every parameter of a small network against the
/// squared-error loss of one sample.
///
/// Loss differences are formed as `Σ (p⁺ − p⁻)(p⁺ + p⁻ − 2y)`, which is
/// algebraically `L(θ + h) − L(θ − h)` without cancelling two large sums.
/// Entries whose perturbation flips any ReLU are skipped, and the error is
/// taken per parameter tensor; the worst tensor is reported.
pub fn network_check(config: NetworkConfig, seed: u64) -> Result<GradCheck> {
    let params = ModelParams::<f64>::build(config, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let shape = [1, config.input_height, config.input_width];
    let x = Tensor::from_fn(&shape, |_| rng.gen::<f64>());
    let y = Tensor::from_fn(&shape, |_| rng.gen::<f64>());
    let delta = match config.variant {
        Variant::Forward => DeltaEncoding::scalar(14)?,
        Variant::Backward => DeltaEncoding::one_hot_week(14)?,
    };

    let (_, analytic) = params.loss_and_grad(&x, &delta, &y, 1)?;
    let base = params.forward_traced(&x, &delta)?.relu_states();
    let output_at = |p: &ModelParams<f64>| -> Result<Option<Tensor<f64>>> {
        let trace = p.forward_traced(&x, &delta)?;
        Ok((trace.relu_states() == base).then(|| trace.into_output()))
    };

    let mut probe = params.clone();
    let (mut worst, mut checked, mut skipped) = (0.0f64, 0usize, 0usize);
    for (t, grad) in analytic.iter().enumerate() {
        let (mut a, mut n) = (Vec::new(), Vec::new());
        for i in 0..grad.len() {
            let orig = probe.tensors()[t].data()[i];
            probe.tensors_mut()[t].data_mut()[i] = orig + STEP;
            let up = output_at(&probe)?;
            probe.tensors_mut()[t].data_mut()[i] = orig - STEP;
            let down = output_at(&probe)?;
            probe.tensors_mut()[t].data_mut()[i] = orig;
            let (Some(up), Some(down)) = (up, down) else {
                skipped += 1;
                continue;
            };
            let diff: f64 = up
                .data()
                .iter()
                .zip(down.data())
                .zip(y.data())
                .map(|((&u, &d), &target)| (u - d) * (u + d - 2.0 * target))
                .sum();
            a.push(grad.data()[i]);
            n.push(diff / (2.0 * STEP));
        }
        checked += a.len();
        if !a.is_empty() {
            worst = worst.max(relative_error(&a, &n));
        }
    }
    Ok(GradCheck {
        name: alloc::format!("{} network end-to-end", config.variant),
        max_relative_error: worst,
        checked,
        skipped,
        tolerance: NETWORK_TOLERANCE,
    })
}

/// The 32×32 network with a 2→32 channel schedule used for end-to-end
/// checks.
pub fn tiny_config(variant: Variant) -> NetworkConfig {
    NetworkConfig {
        delta_hidden: 6,
        delta_channels: 2,
        ..NetworkConfig::scaled(variant, 32, 32, 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_layer_passes() {
        for check in layer_suite(1).unwrap() {
            assert!(check.passed(), "{check:?}");
        }
    }
}
