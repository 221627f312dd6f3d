use std::path::{Path, PathBuf};

use super::{BenchError, Config, Manifest, ManifestEntry, SynthConfig};
use crate::media::{save_y4m, Clip};
use crate::tafi::{
    mixed_training_set, tune_profile, ProfileEntry, ProfileKey, ProfileMeta, TunedProfileSet,
};
use crate::texclass::TextureClass;
use crate::texgen::{mix_seed, synth_corpus};

pub const TRAIN_PREFIX: &str = "train";
pub const TEST_PREFIX: &str = "test";

const TRAIN_SALT: u64 = 0x7472_6169_6e00_0000;
const TEST_SALT: u64 = 0x7465_7374_0000_0000;

/// Generates disjoint training and test corpora. Clip seeds of the two
/// splits are derived from different salts and names carry the split prefix,
/// e.g. `train_static_003` and `test_static_003`.
pub fn synth_split(config: &SynthConfig) -> Result<(Vec<Clip>, Vec<Clip>), BenchError> {
    let base = config.base_spec();
    let split = |per_class, salt, prefix: &str| -> Result<Vec<Clip>, BenchError> {
        Ok(
            synth_corpus(per_class, &base, mix_seed(config.seed ^ salt))?
                .into_iter()
                .map(|c| {
                    let name = format!("{prefix}_{}", c.name());
                    c.with_name(name)
                })
                .collect(),
        )
    };
    Ok((
        split(config.train_per_class, TRAIN_SALT, TRAIN_PREFIX)?,
        split(config.test_per_class, TEST_SALT, TEST_PREFIX)?,
    ))
}

/// Saves each clip as `<dir>/<name>.y4m` and writes a manifest with relative
/// paths to `manifest_path`.
pub fn write_corpus(
    clips: &[Clip],
    dir: &Path,
    manifest_path: &Path,
) -> Result<Manifest, BenchError> {
    std::fs::create_dir_all(dir).map_err(|source| BenchError::WriteFailed {
        path: dir.to_path_buf(),
        source,
    })?;
    let base = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let mut entries = Vec::with_capacity(clips.len());
    for clip in clips {
        let file = dir.join(format!("{}.y4m", clip.name()));
        save_y4m(clip, &file)?;
        let rel = file.strip_prefix(&base).map(PathBuf::from).unwrap_or(file);
        entries.push(ManifestEntry::y4m(clip.name(), rel, clip.label()));
    }
    let manifest = Manifest::new(entries, base);
    manifest.save(manifest_path)?;
    Ok(manifest)
}

/// Tunes the requested profiles on labelled training clips. Class profiles
/// use the clips of their class; the mixed profile uses all classes combined
/// according to `config.mixing`.
pub fn tune_profiles(
    train: &[Clip],
    config: &Config,
    keys: &[ProfileKey],
) -> Result<TunedProfileSet, BenchError> {
    let by_class: Vec<Vec<Clip>> = TextureClass::ALL
        .iter()
        .map(|&k| {
            train
                .iter()
                .filter(|c| c.label() == Some(k))
                .cloned()
                .collect()
        })
        .collect();
    let mut set = TunedProfileSet::new();
    for &key in keys {
        let clips: Vec<&Clip> = match key {
            ProfileKey::Baseline => continue,
            ProfileKey::Mixed => {
                let lists: Vec<&[Clip]> = by_class.iter().map(Vec::as_slice).collect();
                mixed_training_set(&lists, config.mixing)
            }
            class_key => {
                let class = class_key.class().expect("class profile");
                by_class[class.index()].iter().collect()
            }
        };
        log::info!("tuning {key} on {} clips", clips.len());
        let outcome = tune_profile(&clips, &config.tuning)?;
        log::info!(
            "{key}: {} (loss {:.4}, baseline {:.4})",
            outcome.params.summary(),
            outcome.final_loss,
            outcome.baseline_loss
        );
        let mut names: Vec<String> = clips.iter().map(|c| c.name().to_string()).collect();
        names.sort();
        names.dedup();
        set.insert(
            key,
            ProfileEntry {
                params: outcome.params,
                meta: ProfileMeta {
                    final_loss: Some(outcome.final_loss),
                    seed: Some(config.tuning.seed),
                    triplets: outcome.triplets,
                    clips: names,
                },
            },
        )?;
    }
    Ok(set)
}
