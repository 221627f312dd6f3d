use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TafiError;
use crate::interp::InterpParams;
use crate::texclass::TextureClass;

/// Key of one entry in a [`TunedProfileSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKey {
    Static,
    Dyndis,
    Dyncon,
    Mixed,
    Baseline,
}

impl ProfileKey {
    pub const ALL: [ProfileKey; 5] = [
        ProfileKey::Static,
        ProfileKey::Dyndis,
        ProfileKey::Dyncon,
        ProfileKey::Mixed,
        ProfileKey::Baseline,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKey::Static => "static",
            ProfileKey::Dyndis => "dyndis",
            ProfileKey::Dyncon => "dyncon",
            ProfileKey::Mixed => "mixed",
            ProfileKey::Baseline => "baseline",
        }
    }

    pub fn class(self) -> Option<TextureClass> {
        match self {
            ProfileKey::Static => Some(TextureClass::Static),
            ProfileKey::Dyndis => Some(TextureClass::Dyndis),
            ProfileKey::Dyncon => Some(TextureClass::Dyncon),
            ProfileKey::Mixed | ProfileKey::Baseline => None,
        }
    }
}

impl From<TextureClass> for ProfileKey {
    fn from(class: TextureClass) -> Self {
        match class {
            TextureClass::Static => ProfileKey::Static,
            TextureClass::Dyndis => ProfileKey::Dyndis,
            TextureClass::Dyncon => ProfileKey::Dyncon,
        }
    }
}

impl fmt::Display for ProfileKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProfileKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown profile `{s}`"))
    }
}

/// How an entry was produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    /// Mean absolute luma error on the final tuning batch, gray levels.
    pub final_loss: Option<f64>,
    pub seed: Option<u64>,
    pub triplets: usize,
    /// Names of the clips the profile was tuned on.
    #[serde(default)]
    pub clips: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub params: InterpParams,
    #[serde(default)]
    pub meta: ProfileMeta,
}

/// Tuned interpolator configurations keyed by texture class, plus the
/// mixed and baseline versions. The three class entries together form the
/// texture-aware composite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<ProfileKey, ProfileEntry>",
    into = "BTreeMap<ProfileKey, ProfileEntry>"
)]
pub struct TunedProfileSet {
    entries: BTreeMap<ProfileKey, ProfileEntry>,
}

impl Default for TunedProfileSet {
    fn default() -> Self {
        Self::new()
    }
}

impl TryFrom<BTreeMap<ProfileKey, ProfileEntry>> for TunedProfileSet {
    type Error = String;

    fn try_from(mut entries: BTreeMap<ProfileKey, ProfileEntry>) -> Result<Self, Self::Error> {
        for (key, entry) in &entries {
            entry
                .params
                .validate()
                .map_err(|e| format!("profile {key}: {e}"))?;
        }
        entries
            .entry(ProfileKey::Baseline)
            .or_insert_with(baseline_entry);
        Ok(Self { entries })
    }
}

impl From<TunedProfileSet> for BTreeMap<ProfileKey, ProfileEntry> {
    fn from(set: TunedProfileSet) -> Self {
        set.entries
    }
}

fn baseline_entry() -> ProfileEntry {
    ProfileEntry {
        params: InterpParams::default(),
        meta: ProfileMeta::default(),
    }
}

/// Result of [`TunedProfileSet::route`].
#[derive(Clone, Debug, PartialEq)]
pub struct Routed {
    pub params: InterpParams,
    /// Entry actually used.
    pub source: ProfileKey,
    /// True when the class entry was absent.
    pub fallback: bool,
}

impl TunedProfileSet {
    /// A set holding only the baseline entry.
    pub fn new() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(ProfileKey::Baseline, baseline_entry());
        Self { entries }
    }

    /// Inserts or replaces an entry. Replacing the baseline is rejected
    /// unless `entry.params` is the default configuration.
    pub fn insert(&mut self, key: ProfileKey, entry: ProfileEntry) -> Result<(), TafiError> {
        entry.params.validate()?;
        if key == ProfileKey::Baseline && entry.params != InterpParams::default() {
            return Err(TafiError::InvalidSpec(
                "baseline entry must hold the default configuration".into(),
            ));
        }
        self.entries.insert(key, entry);
        Ok(())
    }

    pub fn get(&self, key: ProfileKey) -> Option<&ProfileEntry> {
        self.entries.get(&key)
    }

    pub fn params(&self, key: ProfileKey) -> Option<&InterpParams> {
        self.get(key).map(|e| &e.params)
    }

    pub fn keys(&self) -> impl Iterator<Item = ProfileKey> + '_ {
        self.entries.keys().copied()
    }

    /// True when all three class entries are present.
    pub fn has_composite(&self) -> bool {
        TextureClass::ALL
            .iter()
            .all(|&c| self.entries.contains_key(&c.into()))
    }

    /// The configuration to use on a clip of `class`: its own entry, else
    /// mixed, else baseline.
    pub fn route(&self, class: TextureClass) -> Routed {
        let wanted = ProfileKey::from(class);
        let source = [wanted, ProfileKey::Mixed, ProfileKey::Baseline]
            .into_iter()
            .find(|k| self.entries.contains_key(k))
            .expect("baseline entry is always present");
        Routed {
            params: self.entries[&source].params.clone(),
            source,
            fallback: source != wanted,
        }
    }

    /// Names of every clip any entry was tuned on.
    pub fn training_clips(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self
            .entries
            .values()
            .flat_map(|e| e.meta.clips.iter().map(String::as_str))
            .collect();
        names.sort_unstable();
        names.dedup();
        names
    }

    pub fn to_toml(&self) -> Result<String, TafiError> {
        toml::to_string(self).map_err(|e| TafiError::ProfileFormat(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self, TafiError> {
        toml::from_str(text).map_err(|e| TafiError::ProfileFormat(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), TafiError> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TafiError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}
