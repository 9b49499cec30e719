//! Dataset splitting, `{X, Δt, Y}` sample construction and the training
//! loop.

mod dataset;
mod trainer;

pub use dataset::{
    make_samples, make_test_samples, split_dataset, ImpressionRecord, TrainingSample, DEFAULT_TRAIN_FRACTION,
};
pub use trainer::{
    train, train_from, EpochStats, ExperimentConfig, TrainOutcome, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE,
    DESK_EPOCHS,
};
