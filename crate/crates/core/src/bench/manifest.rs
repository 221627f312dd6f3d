use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::media::{load_y4m, read_raw, Clip, FrameRate};
use crate::texclass::TextureClass;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Container {
    #[default]
    Y4m,
    /// Headerless concatenated 4:2:0 frames; geometry comes from the entry.
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub clip_id: String,
    /// Relative paths are resolved against the manifest's directory.
    pub path: PathBuf,
    #[serde(default)]
    pub container: Container,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
    /// Raw entries only, `num:den`; defaults to 25:1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<TextureClass>,
}

impl ManifestEntry {
    pub fn y4m(
        clip_id: impl Into<String>,
        path: impl Into<PathBuf>,
        label: Option<TextureClass>,
    ) -> Self {
        Self {
            clip_id: clip_id.into(),
            path: path.into(),
            container: Container::Y4m,
            width: None,
            height: None,
            fps: None,
            label,
        }
    }
}

/// List of labelled clips, stored as a TOML document of `[[entry]]` tables.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(rename = "entry", default)]
    pub entries: Vec<ManifestEntry>,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Manifest {
    pub fn new(entries: Vec<ManifestEntry>, base_dir: impl Into<PathBuf>) -> Self {
        Self {
            entries,
            base_dir: base_dir.into(),
        }
    }

    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, BenchError> {
        let mut manifest: Manifest =
            toml::from_str(text).map_err(|e| BenchError::ManifestFormat(e.to_string()))?;
        manifest.base_dir = base_dir.into();
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_toml(&self) -> Result<String, BenchError> {
        toml::to_string(self).map_err(|e| BenchError::ManifestFormat(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| BenchError::MissingFile(path.to_path_buf()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base)
    }

    pub fn save(&self, path: &Path) -> Result<(), BenchError> {
        std::fs::write(path, self.to_toml()?).map_err(|source| BenchError::WriteFailed {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.entries.is_empty() {
            return Err(BenchError::EmptyManifest);
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if e.clip_id.is_empty() {
                return Err(BenchError::ManifestFormat("empty clip_id".into()));
            }
            if !seen.insert(e.clip_id.as_str()) {
                return Err(BenchError::ManifestFormat(format!(
                    "duplicate clip_id `{}`",
                    e.clip_id
                )));
            }
            if e.container == Container::Raw && (e.width.is_none() || e.height.is_none()) {
                return Err(BenchError::ManifestFormat(format!(
                    "raw entry `{}` needs width and height",
                    e.clip_id
                )));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            self.base_dir.join(&entry.path)
        }
    }

    pub fn clip_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.clip_id.as_str())
    }

    /// Reads one entry; the clip is named by its `clip_id` and carries its label.
    pub fn load_clip(&self, entry: &ManifestEntry) -> Result<Clip, BenchError> {
        let path = self.resolve(entry);
        if !path.is_file() {
            return Err(BenchError::MissingFile(path));
        }
        let clip = match entry.container {
            Container::Y4m => load_y4m(&path)?,
            Container::Raw => {
                let fps = match &entry.fps {
                    Some(s) => s.parse::<FrameRate>()?,
                    None => FrameRate::new(25, 1)?,
                };
                let file = File::open(&path).map_err(|_| BenchError::MissingFile(path.clone()))?;
                let (w, h) = (entry.width.unwrap_or(0), entry.height.unwrap_or(0));
                read_raw(BufReader::new(file), w, h, fps)?
            }
        };
        Ok(clip
            .with_name(entry.clip_id.clone())
            .with_label(entry.label))
    }

    pub fn load_clips(&self) -> Result<Vec<Clip>, BenchError> {
        self.validate()?;
        self.entries.iter().map(|e| self.load_clip(e)).collect()
    }
}
