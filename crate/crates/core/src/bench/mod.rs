//! Evaluation protocol, corpus manifests and report generation.
//!
//! Every odd frame of a clip is treated as ground truth and interpolated
//! from its two neighbours. Scores are grouped by texture class, compared
//! against the baseline configuration and tested for significance.

mod config;
mod evaluate;
mod manifest;
mod pipeline;
mod report;
mod summary;

pub use config::{BenchmarkConfig, Config, SynthConfig};
pub use evaluate::{
    evaluate_clip, interpolated_clip, run_benchmark, run_benchmark_on, BenchReport, RunEcho,
    SequenceScore, VersionScores,
};
pub use manifest::{Container, Manifest, ManifestEntry};
pub use pipeline::{synth_split, tune_profiles, write_corpus, TEST_PREFIX, TRAIN_PREFIX};
pub use report::{
    emit_report, format_cell, format_p, render_stats, render_table, ReportFiles, FLAT_SCORES_FILE,
};
pub use summary::{
    aggregate, clip_means, distribution, five_number_summary, read_flat_scores, statistical_tests,
    write_flat_scores, Aggregate, ClipMean, Distribution, FlatRow, Group, Metric, StatTest,
    TestKind,
};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::InterpError;
use crate::media::MediaError;
use crate::metrics::{MetricError, VmafError};
use crate::tafi::{ProfileKey, TafiError};
use crate::texclass::{TexClassError, TextureClass};
use crate::texgen::SynthError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("manifest has no entries")]
    EmptyManifest,
    #[error("missing input file {0}")]
    MissingFile(PathBuf),
    #[error("malformed manifest: {0}")]
    ManifestFormat(String),
    #[error("malformed config: {0}")]
    ConfigFormat(String),
    #[error("malformed scores table: {0}")]
    ScoresFormat(String),
    #[error("clip {clip_id} has {frames} frames, need at least 3")]
    ClipTooShort { clip_id: String, frames: usize },
    #[error("profile set has no `{0}` entry")]
    MissingProfile(ProfileKey),
    #[error("test clips overlap the tuning set: {}", .0.join(", "))]
    TrainTestOverlap(Vec<String>),
    #[error("could not write {path}: {source}")]
    WriteFailed {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Geometry(#[from] MediaError),
    #[error(transparent)]
    ExternalTool(#[from] VmafError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Tafi(#[from] TafiError),
    #[error(transparent)]
    Classifier(#[from] TexClassError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl BenchError {
    /// True for failures of the external quality tool (exit code 2 in the CLI).
    pub fn is_external(&self) -> bool {
        matches!(self, BenchError::ExternalTool(_))
    }
}

/// One evaluated interpolator version.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Version {
    Baseline,
    Static,
    Dyndis,
    Dyncon,
    Mixed,
    /// Class profiles routed by ground-truth label (classifier output for unlabelled clips).
    Tafi,
    /// Class profiles routed by classifier output.
    TafiClassifier,
}

impl Version {
    pub const ALL: [Version; 7] = [
        Version::Baseline,
        Version::Static,
        Version::Dyndis,
        Version::Dyncon,
        Version::Mixed,
        Version::Tafi,
        Version::TafiClassifier,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Version::Baseline => "baseline",
            Version::Static => "static",
            Version::Dyndis => "dyndis",
            Version::Dyncon => "dyncon",
            Version::Mixed => "mixed",
            Version::Tafi => "tafi",
            Version::TafiClassifier => "tafi_classifier",
        }
    }

    /// The single profile behind a non-composite version.
    pub fn profile(self) -> Option<ProfileKey> {
        match self {
            Version::Baseline => Some(ProfileKey::Baseline),
            Version::Static => Some(ProfileKey::Static),
            Version::Dyndis => Some(ProfileKey::Dyndis),
            Version::Dyncon => Some(ProfileKey::Dyncon),
            Version::Mixed => Some(ProfileKey::Mixed),
            Version::Tafi | Version::TafiClassifier => None,
        }
    }
}

impl From<TextureClass> for Version {
    fn from(class: TextureClass) -> Self {
        match class {
            TextureClass::Static => Version::Static,
            TextureClass::Dyndis => Version::Dyndis,
            TextureClass::Dyncon => Version::Dyncon,
        }
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Version {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown version `{s}`"))
    }
}
