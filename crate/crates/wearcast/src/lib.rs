//! File formats, dataset handling and training orchestration around
//! `wearcast-core`, and the `sole` command-line tool.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod manifest;
pub mod pgm;
pub mod pipeline;
pub mod register;

pub use error::{Error, Result};
