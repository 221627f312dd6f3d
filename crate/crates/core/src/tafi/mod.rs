//! Per-texture-class specialization of the interpolator.
//!
//! Tuning is a seeded coordinate-descent search over [`InterpParams`]
//! driven by augmented training triplets; the resulting profiles are
//! selected per clip by texture class.

mod profile;
mod sample;
mod tune;

pub use profile::{ProfileEntry, ProfileKey, ProfileMeta, Routed, TunedProfileSet};
pub use sample::{augment, sample_triplets, Augmentation, Triplet};
pub use tune::{
    batch_loss, mixed_training_set, tune_profile, MixingPolicy, SearchSpace, TuneOutcome,
    TuningSpec,
};

use thiserror::Error;

use crate::interp::{InterpError, InterpParams};
use crate::media::MediaError;
use crate::metrics::MetricError;

#[derive(Debug, Error)]
pub enum TafiError {
    #[error("no clips to sample from")]
    EmptyClipList,
    #[error("patch {patch} does not fit {width}x{height} frames")]
    PatchTooLarge {
        patch: usize,
        width: usize,
        height: usize,
    },
    #[error("clip {clip_id} has {frames} frames, need at least 3")]
    ClipTooShort { clip_id: String, frames: usize },
    #[error("invalid tuning spec: {0}")]
    InvalidSpec(String),
    #[error("malformed profile file: {0}")]
    ProfileFormat(String),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Media(#[from] MediaError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Shorthand for [`TunedProfileSet::route`].
pub fn route(profiles: &TunedProfileSet, class: crate::TextureClass) -> InterpParams {
    profiles.route(class).params
}
