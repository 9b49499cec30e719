//! Layer primitives with explicit forward and backward passes.
//!
//! All functions are pure: they allocate their outputs and never mutate
//! their inputs. Reductions run in a fixed order, so results are bit
//! reproducible for identical inputs.

mod activation;
mod concat;
mod conv;
mod dense;
pub(crate) mod gemm;
mod loss;

pub use activation::{relu, relu_backward, sigmoid, sigmoid_backward};
pub use concat::{concat_channels, split_channels};
pub use conv::{
    conv2d_backward, conv2d_forward, tconv2d_backward, tconv2d_forward, ConvGrads, ConvSpec,
};
pub use dense::{dense_backward, dense_forward, DenseGrads};
pub use loss::mse_loss;
