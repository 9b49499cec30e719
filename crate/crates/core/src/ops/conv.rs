use alloc::vec;
use alloc::vec::Vec;

use super::gemm::{matmul_a_bt, matmul_acc, matmul_at_b};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::tensor::Tensor;

/// Geometry of a 2-D convolution or transpose convolution.
///
/// For [`conv2d_forward`] the weights are `[out, in, kh, kw]`; for
/// [`tconv2d_forward`] they are `[in, out, kh, kw]`, i.e. the weights of the
/// convolution whose adjoint the transpose convolution is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: (usize, usize),
    pub stride: (usize, usize),
    pub padding: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads<T> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

impl ConvSpec {
    pub fn square(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, padding: usize) -> Self {
        ConvSpec {
            in_channels,
            out_channels,
            kernel: (kernel, kernel),
            stride: (stride, stride),
            padding: (padding, padding),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.out_channels == 0 {
            return Err(Error::Config("convolution needs at least one channel".into()));
        }
        if self.kernel.0 == 0 || self.kernel.1 == 0 {
            return Err(Error::Config("kernel must be at least 1×1".into()));
        }
        if self.stride.0 == 0 || self.stride.1 == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn conv_weight_shape(&self) -> [usize; 4] {
        [self.out_channels, self.in_channels, self.kernel.0, self.kernel.1]
    }

    pub fn tconv_weight_shape(&self) -> [usize; 4] {
        [self.in_channels, self.out_channels, self.kernel.0, self.kernel.1]
    }

    /// `floor((H + 2p − k) / s) + 1`, per axis.
    pub fn conv_output_dims(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        self.validate()?;
        let axis = |n: usize, k: usize, s: usize, p: usize| -> Option<usize> {
            let padded = n + 2 * p;
            if padded < k {
                None
            } else {
                Some((padded - k) / s + 1)
            }
        };
        match (
            axis(h, self.kernel.0, self.stride.0, self.padding.0),
            axis(w, self.kernel.1, self.stride.1, self.padding.1),
        ) {
            (Some(oh), Some(ow)) => Ok((oh, ow)),
            _ => Err(Error::Config(alloc::format!(
                "{h}×{w} input is smaller than the {:?} kernel after padding",
                self.kernel
            ))),
        }
    }

    /// `(H − 1)·s − 2p + k`, per axis.
    pub fn tconv_output_dims(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        self.validate()?;
        let axis = |n: usize, k: usize, s: usize, p: usize| -> Option<usize> {
            let full = (n - 1) * s + k;
            full.checked_sub(2 * p).filter(|&v| v > 0)
        };
        if h == 0 || w == 0 {
            return Err(Error::Config("empty transpose convolution input".into()));
        }
        match (
            axis(h, self.kernel.0, self.stride.0, self.padding.0),
            axis(w, self.kernel.1, self.stride.1, self.padding.1),
        ) {
            (Some(oh), Some(ow)) => Ok((oh, ow)),
            _ => Err(Error::Config("padding exceeds transpose convolution output".into())),
        }
    }
}

/// Geometry shared by im2col / col2im: an image of `c×h×w` viewed through a
/// sliding kernel producing `oh×ow` positions.
struct Patches {
    c: usize,
    h: usize,
    w: usize,
    oh: usize,
    ow: usize,
    kh: usize,
    kw: usize,
    sh: usize,
    sw: usize,
    ph: usize,
    pw: usize,
}

impl Patches {
    fn new(spec: &ConvSpec, c: usize, h: usize, w: usize, oh: usize, ow: usize) -> Self {
        Patches {
            c,
            h,
            w,
            oh,
            ow,
            kh: spec.kernel.0,
            kw: spec.kernel.1,
            sh: spec.stride.0,
            sw: spec.stride.1,
            ph: spec.padding.0,
            pw: spec.padding.1,
        }
    }

    fn rows(&self) -> usize {
        self.c * self.kh * self.kw
    }

    fn cols(&self) -> usize {
        self.oh * self.ow
    }

    #[inline]
    fn source(&self, o: usize, k: usize, s: usize, p: usize, n: usize) -> Option<usize> {
        let pos = (o * s + k) as isize - p as isize;
        if pos >= 0 && (pos as usize) < n {
            Some(pos as usize)
        } else {
            None
        }
    }

    /// `[c·kh·kw, oh·ow]` patch matrix; out-of-bounds taps read zero.
    fn im2col<T: Real>(&self, img: &[T]) -> Vec<T> {
        let n = self.cols();
        let mut cols = vec![T::zero(); self.rows() * n];
        for ch in 0..self.c {
            let plane = &img[ch * self.h * self.w..(ch + 1) * self.h * self.w];
            for ky in 0..self.kh {
                for kx in 0..self.kw {
                    let row = (ch * self.kh + ky) * self.kw + kx;
                    let dst = &mut cols[row * n..(row + 1) * n];
                    for oy in 0..self.oh {
                        let Some(iy) = self.source(oy, ky, self.sh, self.ph, self.h) else {
                            continue;
                        };
                        let src = &plane[iy * self.w..(iy + 1) * self.w];
                        let out = &mut dst[oy * self.ow..(oy + 1) * self.ow];
                        for (ox, v) in out.iter_mut().enumerate() {
                            if let Some(ix) = self.source(ox, kx, self.sw, self.pw, self.w) {
                                *v = src[ix];
                            }
                        }
                    }
                }
            }
        }
        cols
    }

    /// Adjoint of [`Patches::im2col`]: scatter-adds patch values back into an
    /// image of `c×h×w`.
    fn col2im<T: Real>(&self, cols: &[T]) -> Vec<T> {
        let n = self.cols();
        let mut img = vec![T::zero(); self.c * self.h * self.w];
        for ch in 0..self.c {
            let plane = &mut img[ch * self.h * self.w..(ch + 1) * self.h * self.w];
            for ky in 0..self.kh {
                for kx in 0..self.kw {
                    let row = (ch * self.kh + ky) * self.kw + kx;
                    let src = &cols[row * n..(row + 1) * n];
                    for oy in 0..self.oh {
                        let Some(iy) = self.source(oy, ky, self.sh, self.ph, self.h) else {
                            continue;
                        };
                        let dst = &mut plane[iy * self.w..(iy + 1) * self.w];
                        for (ox, &v) in src[oy * self.ow..(oy + 1) * self.ow].iter().enumerate() {
                            if let Some(ix) = self.source(ox, kx, self.sw, self.pw, self.w) {
                                dst[ix] += v;
                            }
                        }
                    }
                }
            }
        }
        img
    }
}

fn check_input<T: Real>(op: &'static str, input: &Tensor<T>, channels: usize) -> Result<(usize, usize)> {
    let (c, h, w) = input.chw(op)?;
    if c != channels {
        return Err(Error::shape(op, &[channels, h, w], input.shape()));
    }
    Ok((h, w))
}

fn add_channel_bias<T: Real>(out: &mut [T], bias: &[T], plane: usize) {
    for (chunk, &b) in out.chunks_exact_mut(plane).zip(bias) {
        for v in chunk {
            *v += b;
        }
    }
}

fn channel_sums<T: Real>(grad: &[T], channels: usize, plane: usize) -> Tensor<T> {
    Tensor::from_fn(&[channels], |o| grad[o * plane..(o + 1) * plane].iter().copied().sum())
}

/// Strided 2-D cross-correlation (no kernel flip):
/// `out[o, y, x] = b[o] + Σ_{c,i,j} w[o, c, i, j] · in[c, y·s + i − p, x·s + j − p]`.
pub fn conv2d_forward<T: Real>(
    input: &Tensor<T>,
    spec: &ConvSpec,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let (h, w) = check_input("conv2d_forward", input, spec.in_channels)?;
    weights.ensure_shape("conv2d_forward weights", &spec.conv_weight_shape())?;
    bias.ensure_shape("conv2d_forward bias", &[spec.out_channels])?;
    let (oh, ow) = spec.conv_output_dims(h, w)?;

    let patches = Patches::new(spec, spec.in_channels, h, w, oh, ow);
    let cols = patches.im2col(input.data());
    let n = oh * ow;
    let mut out = vec![T::zero(); spec.out_channels * n];
    add_channel_bias(&mut out, bias.data(), n);
    matmul_acc(weights.data(), &cols, &mut out, spec.out_channels, patches.rows(), n);
    Tensor::new(&[spec.out_channels, oh, ow], out)
}

pub fn conv2d_backward<T: Real>(
    grad_out: &Tensor<T>,
    cached_input: &Tensor<T>,
    spec: &ConvSpec,
    weights: &Tensor<T>,
) -> Result<ConvGrads<T>> {
    let (h, w) = check_input("conv2d_backward", cached_input, spec.in_channels)?;
    weights.ensure_shape("conv2d_backward weights", &spec.conv_weight_shape())?;
    let (oh, ow) = spec.conv_output_dims(h, w)?;
    grad_out.ensure_shape("conv2d_backward grad_out", &[spec.out_channels, oh, ow])?;

    let patches = Patches::new(spec, spec.in_channels, h, w, oh, ow);
    let (k, n) = (patches.rows(), patches.cols());
    let cols = patches.im2col(cached_input.data());

    let mut grad_w = vec![T::zero(); spec.out_channels * k];
    matmul_a_bt(grad_out.data(), &cols, &mut grad_w, spec.out_channels, n, k);

    let mut grad_cols = vec![T::zero(); k * n];
    matmul_at_b(weights.data(), grad_out.data(), &mut grad_cols, k, spec.out_channels, n);
    let grad_in = patches.col2im(&grad_cols);

    Ok(ConvGrads {
        input: Tensor::new(cached_input.shape(), grad_in)?,
        weights: Tensor::new(&spec.conv_weight_shape(), grad_w)?,
        bias: channel_sums(grad_out.data(), spec.out_channels, n),
    })
}

/// Transpose convolution: the adjoint of [`conv2d_forward`] with the same
/// weights (bias aside), used as a learnable upsampler.
pub fn tconv2d_forward<T: Real>(
    input: &Tensor<T>,
    spec: &ConvSpec,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let (h, w) = check_input("tconv2d_forward", input, spec.in_channels)?;
    weights.ensure_shape("tconv2d_forward weights", &spec.tconv_weight_shape())?;
    bias.ensure_shape("tconv2d_forward bias", &[spec.out_channels])?;
    let (oh, ow) = spec.tconv_output_dims(h, w)?;

    // The output plays the role of the convolution's input: patches are laid
    // over the oh×ow output and produce h×w positions.
    let patches = Patches::new(spec, spec.out_channels, oh, ow, h, w);
    let (k, n) = (patches.rows(), patches.cols());
    let mut cols = vec![T::zero(); k * n];
    matmul_at_b(weights.data(), input.data(), &mut cols, k, spec.in_channels, n);
    let mut out = patches.col2im(&cols);
    add_channel_bias(&mut out, bias.data(), oh * ow);
    Tensor::new(&[spec.out_channels, oh, ow], out)
}

pub fn tconv2d_backward<T: Real>(
    grad_out: &Tensor<T>,
    cached_input: &Tensor<T>,
    spec: &ConvSpec,
    weights: &Tensor<T>,
) -> Result<ConvGrads<T>> {
    let (h, w) = check_input("tconv2d_backward", cached_input, spec.in_channels)?;
    weights.ensure_shape("tconv2d_backward weights", &spec.tconv_weight_shape())?;
    let (oh, ow) = spec.tconv_output_dims(h, w)?;
    grad_out.ensure_shape("tconv2d_backward grad_out", &[spec.out_channels, oh, ow])?;

    let patches = Patches::new(spec, spec.out_channels, oh, ow, h, w);
    let (k, n) = (patches.rows(), patches.cols());
    let gcols = patches.im2col(grad_out.data());

    let mut grad_in = vec![T::zero(); spec.in_channels * n];
    matmul_acc(weights.data(), &gcols, &mut grad_in, spec.in_channels, k, n);

    let mut grad_w = vec![T::zero(); spec.in_channels * k];
    matmul_a_bt(cached_input.data(), &gcols, &mut grad_w, spec.in_channels, n, k);

    Ok(ConvGrads {
        input: Tensor::new(cached_input.shape(), grad_in)?,
        weights: Tensor::new(&spec.tconv_weight_shape(), grad_w)?,
        bias: channel_sums(grad_out.data(), spec.out_channels, oh * ow),
    })
}
