//! Contrastive sense encoder: triplet construction, max-margin loss with
//! hand-derived gradients, and Adam training.

mod encoder;
mod sampling;
mod train;

pub use encoder::{triplet_loss, Adam, EncoderParams, EpochLog, Gradient};
pub use sampling::{
    build_positive_pairs, NegativeSampler, PositivePair, Triplet, DEFAULT_MAX_ATTEMPTS,
    MAX_NEGATIVE_OVERLAP, NEAR_PERCENTILE,
};
pub use train::{mean_loss, train, TrainConfig, TrainingData};
