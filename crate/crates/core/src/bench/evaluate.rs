use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::summary::{
    aggregate, distribution, flat_rows, statistical_tests, Aggregate, ClipMean, Distribution,
    FlatRow, StatTest,
};
use super::{BenchError, Config, Manifest, Version};
use crate::interp::{interpolate, InterpParams};
use crate::media::Clip;
use crate::metrics::{score_frame, vmaf_external, MetricRecord, VmafScore};
use crate::tafi::{ProfileKey, TunedProfileSet};
use crate::texclass::{classify, extract_features, TextureClass};

/// Scores of one clip under one version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceScore {
    pub clip_id: String,
    /// Ground-truth class, if the clip is labelled.
    pub label: Option<TextureClass>,
    /// Classifier output, when the classifier was run.
    pub predicted: Option<TextureClass>,
    /// Profile entry that produced the scores.
    pub profile: Option<ProfileKey>,
    pub records: Vec<MetricRecord>,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
    pub vmaf: Option<VmafScore>,
    pub frames_evaluated: usize,
}

impl SequenceScore {
    /// Class used for grouping: the label, else the prediction.
    ///
    /// # Panics
    /// If the clip has neither; [`run_benchmark`] always fills the prediction.
    pub fn group_class(&self) -> TextureClass {
        self.label
            .or(self.predicted)
            .expect("clip has neither label nor prediction")
    }
}

/// Interpolates every odd frame `t` (1 <= t <= len - 2) from `t - 1` and
/// `t + 1` and scores it against the original.
pub fn evaluate_clip(clip: &Clip, params: &InterpParams) -> Result<SequenceScore, BenchError> {
    if clip.len() < 3 {
        return Err(BenchError::ClipTooShort {
            clip_id: clip.name().to_string(),
            frames: clip.len(),
        });
    }
    let mut records = Vec::with_capacity((clip.len() - 1) / 2);
    for t in (1..clip.len() - 1).step_by(2) {
        let out = interpolate(clip.frame(t - 1), clip.frame(t + 1), params)?;
        records.push(score_frame(clip.name(), t, clip.frame(t), &out)?);
    }
    let n = records.len() as f64;
    Ok(SequenceScore {
        clip_id: clip.name().to_string(),
        label: clip.label(),
        predicted: None,
        profile: None,
        mean_psnr: records.iter().map(|r| r.psnr).sum::<f64>() / n,
        mean_ssim: records.iter().map(|r| r.ssim).sum::<f64>() / n,
        frames_evaluated: records.len(),
        records,
        vmaf: None,
    })
}

/// The clip with every evaluated (odd) frame replaced by its interpolation;
/// even frames pass through untouched.
pub fn interpolated_clip(clip: &Clip, params: &InterpParams) -> Result<Clip, BenchError> {
    let mut frames = clip.frames().to_vec();
    for t in (1..clip.len().saturating_sub(1)).step_by(2) {
        frames[t] = interpolate(clip.frame(t - 1), clip.frame(t + 1), params)?;
    }
    Ok(Clip::new(clip.name(), frames, clip.fps())?.with_label(clip.label()))
}

/// All clip scores of one version, in manifest order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VersionScores {
    pub version: Version,
    pub scores: Vec<SequenceScore>,
}

/// Settings echoed into the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunEcho {
    pub tool_version: String,
    pub config: Config,
    pub profiles: TunedProfileSet,
    pub clips: Vec<String>,
    pub vmaf_versions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub versions: Vec<VersionScores>,
    pub aggregates: Vec<Aggregate>,
    pub tests: Vec<StatTest>,
    pub distributions: Vec<Distribution>,
    pub run: RunEcho,
}

impl BenchReport {
    pub fn scores(&self, version: Version) -> Option<&[SequenceScore]> {
        self.versions
            .iter()
            .find(|v| v.version == version)
            .map(|v| v.scores.as_slice())
    }

    pub fn aggregate(
        &self,
        version: Version,
        group: super::Group,
        metric: super::Metric,
    ) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.version == version && a.group == group && a.metric == metric)
    }

    pub fn flat_rows(&self) -> Vec<FlatRow> {
        flat_rows(&self.versions)
    }

    pub fn clip_means(&self) -> Vec<ClipMean> {
        self.versions
            .iter()
            .flat_map(|vs| {
                vs.scores
                    .iter()
                    .map(move |s| ClipMean::from((vs.version, s)))
            })
            .collect()
    }
}

fn requested_versions(
    profiles: &TunedProfileSet,
    config: &Config,
) -> Result<Vec<Version>, BenchError> {
    let versions = match &config.benchmark.versions {
        Some(list) => {
            let set: BTreeSet<Version> = list.iter().copied().collect();
            for v in &set {
                if let Some(key) = v.profile() {
                    if profiles.get(key).is_none() {
                        return Err(BenchError::MissingProfile(key));
                    }
                }
            }
            set.into_iter().collect()
        }
        None => Version::ALL
            .into_iter()
            .filter(|v| match v.profile() {
                Some(key) => profiles.get(key).is_some(),
                None if *v == Version::TafiClassifier => config.benchmark.classifier_version,
                None => true,
            })
            .collect(),
    };
    Ok(versions)
}

/// Loads the manifest's clips and runs [`run_benchmark_on`].
pub fn run_benchmark(
    manifest: &Manifest,
    profiles: &TunedProfileSet,
    config: &Config,
) -> Result<BenchReport, BenchError> {
    let clips = manifest.load_clips()?;
    run_benchmark_on(&clips, profiles, config)
}

/// Evaluates every clip under every requested version.
///
/// Each distinct configuration is run once per clip; the composite versions
/// reuse the score of the profile they route to.
pub fn run_benchmark_on(
    clips: &[Clip],
    profiles: &TunedProfileSet,
    config: &Config,
) -> Result<BenchReport, BenchError> {
    if clips.is_empty() {
        return Err(BenchError::EmptyManifest);
    }
    config.validate()?;
    if !config.benchmark.allow_train_overlap {
        let trained: BTreeSet<&str> = profiles.training_clips().into_iter().collect();
        let overlap: Vec<String> = clips
            .iter()
            .map(Clip::name)
            .filter(|n| trained.contains(n))
            .map(str::to_string)
            .collect();
        if !overlap.is_empty() {
            return Err(BenchError::TrainTestOverlap(overlap));
        }
    }
    let versions = requested_versions(profiles, config)?;

    let per_clip: Vec<HashMap<Version, SequenceScore>> = clips
        .par_iter()
        .map(|clip| score_clip(clip, &versions, profiles, config))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::with_capacity(versions.len());
    for &version in &versions {
        let scores = per_clip.iter().map(|m| m[&version].clone()).collect();
        out.push(VersionScores { version, scores });
    }

    let mut vmaf_versions: Vec<String> = out
        .iter()
        .flat_map(|vs| vs.scores.iter())
        .filter_map(|s| s.vmaf.as_ref().and_then(|v| v.version.clone()))
        .collect();
    vmaf_versions.sort();
    vmaf_versions.dedup();

    let means: Vec<ClipMean> = out
        .iter()
        .flat_map(|vs| {
            vs.scores
                .iter()
                .map(move |s| ClipMean::from((vs.version, s)))
        })
        .collect();
    Ok(BenchReport {
        aggregates: aggregate(&means),
        tests: statistical_tests(&means, config.benchmark.alpha),
        distributions: distribution(&means),
        versions: out,
        run: RunEcho {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            profiles: profiles.clone(),
            clips: clips.iter().map(|c| c.name().to_string()).collect(),
            vmaf_versions,
        },
    })
}

fn score_clip(
    clip: &Clip,
    versions: &[Version],
    profiles: &TunedProfileSet,
    config: &Config,
) -> Result<HashMap<Version, SequenceScore>, BenchError> {
    let features = extract_features(clip, &InterpParams::default())?;
    let predicted = classify(&features, &config.classifier);
    let label_route = clip.label().unwrap_or(predicted);

    let source = |version: Version| -> ProfileKey {
        match version {
            Version::Tafi => profiles.route(label_route).source,
            Version::TafiClassifier => profiles.route(predicted).source,
            v => v.profile().expect("single-profile version"),
        }
    };

    // One evaluation per distinct configuration; profiles that tuned to the
    // same parameters share it.
    let mut by_params: HashMap<String, SequenceScore> = HashMap::new();
    let mut by_profile: HashMap<ProfileKey, SequenceScore> = HashMap::new();
    for &version in versions {
        let key = source(version);
        if by_profile.contains_key(&key) {
            continue;
        }
        let params = profiles
            .params(key)
            .ok_or(BenchError::MissingProfile(key))?;
        let summary = params.summary();
        let mut score = match by_params.get(&summary) {
            Some(done) => done.clone(),
            None => {
                let mut score = evaluate_clip(clip, params)?;
                score.predicted = Some(predicted);
                if config.vmaf.command.is_some() {
                    let distorted = interpolated_clip(clip, params)?;
                    score.vmaf = vmaf_external(clip, &distorted, &config.vmaf)?;
                }
                by_params.insert(summary, score.clone());
                score
            }
        };
        score.profile = Some(key);
        by_profile.insert(key, score);
    }
    Ok(versions
        .iter()
        .map(|&v| (v, by_profile[&source(v)].clone()))
        .collect())
}
