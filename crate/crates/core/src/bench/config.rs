use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BenchError, Version};
use crate::metrics::VmafConfig;
use crate::tafi::{MixingPolicy, TuningSpec};
use crate::texclass::ClassifierThresholds;
use crate::texgen::SynthSpec;
use crate::TextureClass;

/// Synthetic corpus settings of the `synth` step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub motion_amplitude: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let base = SynthSpec::new(TextureClass::Static, 0);
        Self {
            seed: 2024,
            train_per_class: 12,
            test_per_class: 12,
            width: base.width,
            height: base.height,
            frames: base.n_frames,
            motion_amplitude: base.motion_amplitude,
        }
    }
}

impl SynthConfig {
    /// Per-clip template; class and seed are filled in per clip.
    pub fn base_spec(&self) -> SynthSpec {
        SynthSpec {
            width: self.width,
            height: self.height,
            n_frames: self.frames,
            motion_amplitude: self.motion_amplitude,
            ..SynthSpec::new(TextureClass::Static, 0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    /// Significance level of the reported tests.
    pub alpha: f64,
    /// Also report the composite routed by classifier output.
    pub classifier_version: bool,
    /// Evaluate even when test clip ids were used for tuning.
    pub allow_train_overlap: bool,
    /// Versions to evaluate; all available ones when absent.
    pub versions: Option<Vec<Version>>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            classifier_version: false,
            allow_train_overlap: false,
            versions: None,
        }
    }
}

/// Complete run configuration, stored as TOML.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub synth: SynthConfig,
    pub classifier: ClassifierThresholds,
    pub tuning: TuningSpec,
    pub mixing: MixingPolicy,
    pub benchmark: BenchmarkConfig,
    pub vmaf: VmafConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let config: Config =
            toml::from_str(text).map_err(|e| BenchError::ConfigFormat(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String, BenchError> {
        toml::to_string(self).map_err(|e| BenchError::ConfigFormat(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| BenchError::MissingFile(path.to_path_buf()))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::ConfigFormat(msg));
        if !(self.benchmark.alpha > 0.0 && self.benchmark.alpha < 1.0) {
            return bad(format!("alpha {} outside (0, 1)", self.benchmark.alpha));
        }
        let th = &self.classifier;
        if !(th.static_residual_max > 0.0 && th.incoherence_split > 0.0) {
            return bad("classifier thresholds must be > 0".into());
        }
        self.tuning.validate()?;
        Ok(())
    }
}
