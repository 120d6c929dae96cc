//! Desk-scale class-incremental simulator: synthetic Gaussian-mixture task
//! streams, a one-hidden-layer ReLU classifier trained with experience
//! replay, and the average-accuracy metric.

mod experiment;
mod learner;
mod metrics;
mod stream;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentResult, ReplayMode};
pub use learner::{softmax, Gradients, Hyper, Learner, ReplayInput, ReplaySample, TrainReport};
pub use metrics::{evaluate, AccuracyMatrix};
pub use stream::{generate_stream, Sample, StreamConfig, TaskData, TaskStream};

/// SplitMix64 finalizer; derives independent seeds from one run seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
