//! Adapter for an external VMAF tool.
//!
//! The tool is described by a command template whose whitespace-separated
//! arguments may contain the placeholders `{ref}`, `{dist}` and `{out}`. Both
//! clips are written as Y4M temporaries and the pooled score is read from the
//! JSON document the tool writes to `{out}`.

use std::path::Path;
use std::process::Command;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::media::{save_y4m, Clip, MediaError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VmafConfig {
    /// Command template; `None` disables VMAF.
    pub command: Option<String>,
    /// Dotted path of the pooled score in the tool's JSON output.
    pub score_key: String,
    /// Dotted path of the tool/model version string, if reported.
    pub version_key: Option<String>,
}

impl Default for VmafConfig {
    fn default() -> Self {
        Self {
            command: None,
            score_key: "pooled_metrics.vmaf.mean".to_string(),
            version_key: Some("version".to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VmafScore {
    pub score: f64,
    pub version: Option<String>,
}

#[derive(Debug, Error)]
pub enum VmafError {
    #[error("VMAF tool failed: {0}")]
    ToolFailed(String),
    #[error("could not stage clips for VMAF: {0}")]
    Staging(#[from] MediaError),
}

/// Runs the configured tool; `Ok(None)` means no tool is configured.
pub fn vmaf_external(
    reference: &Clip,
    test: &Clip,
    config: &VmafConfig,
) -> Result<Option<VmafScore>, VmafError> {
    let Some(template) = config.command.as_deref().filter(|c| !c.trim().is_empty()) else {
        return Ok(None);
    };
    let dir = tempfile::tempdir().map_err(MediaError::from)?;
    let ref_path = dir.path().join("reference.y4m");
    let dist_path = dir.path().join("distorted.y4m");
    let out_path = dir.path().join("vmaf.json");
    save_y4m(reference, &ref_path)?;
    save_y4m(test, &dist_path)?;

    let args: Vec<String> = template
        .split_whitespace()
        .map(|arg| {
            arg.replace("{ref}", &path_str(&ref_path))
                .replace("{dist}", &path_str(&dist_path))
                .replace("{out}", &path_str(&out_path))
        })
        .collect();
    let (program, rest) = args.split_first().expect("non-empty template");
    let output = Command::new(program)
        .args(rest)
        .output()
        .map_err(|e| VmafError::ToolFailed(format!("could not run `{program}`: {e}")))?;
    if !output.status.success() {
        return Err(VmafError::ToolFailed(format!(
            "`{program}` exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let text = std::fs::read_to_string(&out_path)
        .map_err(|e| VmafError::ToolFailed(format!("no output document: {e}")))?;
    parse_output(&text, config).map(Some)
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn lookup<'a>(doc: &'a Value, dotted: &str) -> Option<&'a Value> {
    dotted.split('.').try_fold(doc, |v, key| v.get(key))
}

pub(crate) fn parse_output(text: &str, config: &VmafConfig) -> Result<VmafScore, VmafError> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| VmafError::ToolFailed(format!("unparseable output: {e}")))?;
    let score = lookup(&doc, &config.score_key)
        .and_then(Value::as_f64)
        .ok_or_else(|| {
            VmafError::ToolFailed(format!("output has no numeric `{}`", config.score_key))
        })?;
    let version = config
        .version_key
        .as_deref()
        .and_then(|k| lookup(&doc, k))
        .and_then(|v| v.as_str().map(str::to_string));
    Ok(VmafScore { score, version })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_libvmaf_style_document() {
        let doc =
            r#"{"version": "2.3.1", "pooled_metrics": {"vmaf": {"min": 90.0, "mean": 97.25}}}"#;
        let s = parse_output(doc, &VmafConfig::default()).unwrap();
        assert_eq!(s.score, 97.25);
        assert_eq!(s.version.as_deref(), Some("2.3.1"));
    }

    #[test]
    fn missing_key_is_tool_failure() {
        let doc = r#"{"pooled_metrics": {}}"#;
        assert!(matches!(
            parse_output(doc, &VmafConfig::default()),
            Err(VmafError::ToolFailed(_))
        ));
        assert!(matches!(
            parse_output("not json", &VmafConfig::default()),
            Err(VmafError::ToolFailed(_))
        ));
    }
}
