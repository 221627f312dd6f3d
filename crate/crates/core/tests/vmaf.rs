#![cfg(unix)]

use std::os::unix::fs::PermissionsExt;
use std::path::Path;

use tafi_core::media::{FrameRate, Plane};
use tafi_core::metrics::{vmaf_external, VmafConfig, VmafError};
use tafi_core::{Clip, Frame};

fn clip() -> Clip {
    let frames = (0..3)
        .map(|t| Frame::from_luma(Plane::filled(16, 16, 40 * t as u8)).unwrap())
        .collect();
    Clip::new("c", frames, FrameRate::new(25, 1).unwrap()).unwrap()
}

fn script(dir: &Path, body: &str) -> String {
    let path = dir.join("tool.sh");
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path.to_str().unwrap().to_string()
}

fn config(command: String) -> VmafConfig {
    VmafConfig {
        command: Some(command),
        ..VmafConfig::default()
    }
}

#[test]
fn unconfigured_tool_is_unavailable() {
    assert_eq!(
        vmaf_external(&clip(), &clip(), &VmafConfig::default()).unwrap(),
        None
    );
}

#[test]
fn reads_pooled_score_and_version() {
    let dir = tempfile::tempdir().unwrap();
    // Checks that both staged clips exist before writing the document.
    let tool = script(
        dir.path(),
        r#"test -s "$1" && test -s "$2" || exit 3
printf '{"version": "stub-1.0", "pooled_metrics": {"vmaf": {"mean": 87.25}}}' > "$3""#,
    );
    let score = vmaf_external(
        &clip(),
        &clip(),
        &config(format!("{tool} {{ref}} {{dist}} {{out}}")),
    )
    .unwrap()
    .unwrap();
    assert_eq!(score.score, 87.25);
    assert_eq!(score.version.as_deref(), Some("stub-1.0"));
}

#[test]
fn custom_score_key() {
    let dir = tempfile::tempdir().unwrap();
    let tool = script(
        dir.path(),
        r#"printf '{"aggregate": {"VMAF_score": 91.5}}' > "$1""#,
    );
    let cfg = VmafConfig {
        command: Some(format!("{tool} {{out}}")),
        score_key: "aggregate.VMAF_score".into(),
        version_key: None,
    };
    let score = vmaf_external(&clip(), &clip(), &cfg).unwrap().unwrap();
    assert_eq!((score.score, score.version), (91.5, None));
}

#[test]
fn failures_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let failing = script(dir.path(), "echo boom >&2\nexit 1");
    let err = vmaf_external(&clip(), &clip(), &config(format!("{failing} {{out}}"))).unwrap_err();
    assert!(matches!(err, VmafError::ToolFailed(_)), "{err}");

    let missing = config("/nonexistent/vmaf-tool {out}".into());
    assert!(matches!(
        vmaf_external(&clip(), &clip(), &missing),
        Err(VmafError::ToolFailed(_))
    ));

    let dir2 = tempfile::tempdir().unwrap();
    let garbage = script(dir2.path(), r#"echo 'not json' > "$1""#);
    let err = vmaf_external(&clip(), &clip(), &config(format!("{garbage} {{out}}"))).unwrap_err();
    assert!(matches!(err, VmafError::ToolFailed(_)));
}
