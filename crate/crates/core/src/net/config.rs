use crate::error::{Error, Result};
use crate::net::Variant;
use crate::ops::ConvSpec;

pub const LAYERS: usize = 5;

/// Architecture hyper-parameters. Every tensor shape in
/// [`ModelParams`](crate::net::ModelParams) follows from these.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkConfig {
    pub variant: Variant,
    pub input_height: usize,
    pub input_width: usize,
    pub encoder_channels: [usize; LAYERS],
    /// Width of the first dense layer of the delta branch.
    pub delta_hidden: usize,
    /// Channels of the reshaped delta feature map.
    pub delta_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
}

impl NetworkConfig {
    /// 160×64 input, channels 8→128. The default for laptop-scale runs.
    pub fn desk(variant: Variant) -> Self {
        NetworkConfig {
            variant,
            input_height: 160,
            input_width: 64,
            encoder_channels: [8, 16, 32, 64, 128],
            delta_hidden: 64,
            delta_channels: 8,
            kernel: 4,
            stride: 2,
            padding: 1,
        }
    }

    /// 640×256 input, channels 32→512.
    pub fn full_scale(variant: Variant) -> Self {
        NetworkConfig {
            input_height: 640,
            input_width: 256,
            encoder_channels: [32, 64, 128, 256, 512],
            ..Self::desk(variant)
        }
    }

    /// Arbitrary input size with a doubling channel schedule starting at
    /// `base_channels`.
    pub fn scaled(variant: Variant, height: usize, width: usize, base_channels: usize) -> Self {
        let c = base_channels;
        NetworkConfig {
            input_height: height,
            input_width: width,
            encoder_channels: [c, 2 * c, 4 * c, 8 * c, 16 * c],
            ..Self::desk(variant)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let factor = self.stride.pow(LAYERS as u32);
        if self.input_height == 0 || self.input_width == 0 {
            return Err(Error::Config("input dimensions must be positive".into()));
        }
        if self.input_height % factor != 0 || self.input_width % factor != 0 {
            return Err(Error::Config(alloc::format!(
                "input {}×{} is not divisible by {factor}",
                self.input_height,
                self.input_width
            )));
        }
        if self.encoder_channels[0] == 0 || self.encoder_channels.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Config(alloc::format!(
                "encoder channels {:?} must be positive and strictly increasing",
                self.encoder_channels
            )));
        }
        if self.delta_hidden == 0 || self.delta_channels == 0 {
            return Err(Error::Config("delta branch widths must be positive".into()));
        }
        // The encoder and decoder must mirror each other exactly.
        let (mut h, mut w) = (self.input_height, self.input_width);
        for spec in self.encoder_specs() {
            (h, w) = spec.conv_output_dims(h, w)?;
        }
        for spec in self.decoder_specs() {
            (h, w) = spec.tconv_output_dims(h, w)?;
        }
        if (h, w) != (self.input_height, self.input_width) {
            return Err(Error::Config(alloc::format!(
                "kernel {} / stride {} / padding {} maps {}×{} to {h}×{w}",
                self.kernel,
                self.stride,
                self.padding,
                self.input_height,
                self.input_width
            )));
        }
        Ok(())
    }

    pub fn encoder_specs(&self) -> [ConvSpec; LAYERS] {
        let c = self.encoder_channels;
        let ins = [1, c[0], c[1], c[2], c[3]];
        core::array::from_fn(|i| ConvSpec::square(ins[i], c[i], self.kernel, self.stride, self.padding))
    }

    pub fn decoder_specs(&self) -> [ConvSpec; LAYERS] {
        let c = self.encoder_channels;
        let ins = [c[4] + self.delta_channels, c[3], c[2], c[1], c[0]];
        let outs = [c[3], c[2], c[1], c[0], 1];
        core::array::from_fn(|i| ConvSpec::square(ins[i], outs[i], self.kernel, self.stride, self.padding))
    }

    /// `(channels, height, width)` of the last encoder layer.
    pub fn encoder_output_shape(&self) -> Result<(usize, usize, usize)> {
        let (mut h, mut w) = (self.input_height, self.input_width);
        for spec in self.encoder_specs() {
            (h, w) = spec.conv_output_dims(h, w)?;
        }
        Ok((self.encoder_channels[LAYERS - 1], h, w))
    }

    /// Length of the delta branch output before reshaping.
    pub fn delta_output_len(&self) -> Result<usize> {
        let (_, h, w) = self.encoder_output_shape()?;
        Ok(self.delta_channels * h * w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scale_encoder_bottleneck() {
        let cfg = NetworkConfig::full_scale(Variant::Forward);
        cfg.validate().unwrap();
        assert_eq!(cfg.encoder_output_shape().unwrap(), (512, 20, 8));
        assert_eq!(cfg.delta_output_len().unwrap(), 8 * 20 * 8);
        assert_eq!(cfg.decoder_specs()[0].in_channels, 520);
    }

    #[test]
    fn desk_encoder_bottleneck() {
        let cfg = NetworkConfig::desk(Variant::Backward);
        cfg.validate().unwrap();
        assert_eq!(cfg.encoder_output_shape().unwrap(), (128, 5, 2));
    }

    #[test]
    fn indivisible_dimensions_are_rejected() {
        let mut cfg = NetworkConfig::desk(Variant::Forward);
        cfg.input_height = 100;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn channel_schedule_must_increase() {
        let mut cfg = NetworkConfig::desk(Variant::Forward);
        cfg.encoder_channels = [8, 8, 16, 32, 64];
        assert!(cfg.validate().is_err());
    }
}
