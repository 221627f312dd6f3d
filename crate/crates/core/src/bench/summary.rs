use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{BenchError, SequenceScore, Version, VersionScores};
use crate::stats::{one_way_anova, welch_t_test};
use crate::tafi::ProfileKey;
use crate::texclass::TextureClass;

/// One row of the flat per-frame scores table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatRow {
    pub version: Version,
    pub clip_id: String,
    /// Grouping class: the ground-truth label, or the prediction for unlabelled clips.
    pub class: TextureClass,
    pub label: Option<TextureClass>,
    pub predicted: Option<TextureClass>,
    /// Profile entry that produced the frame.
    pub profile: Option<ProfileKey>,
    pub frame_index: usize,
    pub psnr: f64,
    pub ssim: f64,
    pub capped: bool,
}

pub(crate) fn flat_rows(versions: &[VersionScores]) -> Vec<FlatRow> {
    let mut rows = Vec::new();
    for vs in versions {
        for s in &vs.scores {
            for r in &s.records {
                rows.push(FlatRow {
                    version: vs.version,
                    clip_id: s.clip_id.clone(),
                    class: s.group_class(),
                    label: s.label,
                    predicted: s.predicted,
                    profile: s.profile,
                    frame_index: r.frame_index,
                    psnr: r.psnr,
                    ssim: r.ssim,
                    capped: r.capped,
                });
            }
        }
    }
    rows
}

pub fn write_flat_scores<W: Write>(rows: &[FlatRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)
            .map_err(|e| BenchError::ScoresFormat(e.to_string()))?;
    }
    w.flush()
        .map_err(|e| BenchError::ScoresFormat(e.to_string()))?;
    Ok(())
}

pub fn read_flat_scores<R: Read>(input: R) -> Result<Vec<FlatRow>, BenchError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| BenchError::ScoresFormat(e.to_string())))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Psnr,
    Ssim,
    Vmaf,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Psnr => "psnr",
            Metric::Ssim => "ssim",
            Metric::Vmaf => "vmaf",
        }
    }

    /// Decimals used when rendering values of this metric.
    pub fn decimals(self) -> usize {
        match self {
            Metric::Ssim => 4,
            Metric::Psnr | Metric::Vmaf => 2,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-clip means of one version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipMean {
    pub version: Version,
    pub clip_id: String,
    pub class: TextureClass,
    pub psnr: f64,
    pub ssim: f64,
    pub vmaf: Option<f64>,
}

impl ClipMean {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Psnr => Some(self.psnr),
            Metric::Ssim => Some(self.ssim),
            Metric::Vmaf => self.vmaf,
        }
    }
}

impl From<(Version, &SequenceScore)> for ClipMean {
    fn from((version, s): (Version, &SequenceScore)) -> Self {
        ClipMean {
            version,
            clip_id: s.clip_id.clone(),
            class: s.group_class(),
            psnr: s.mean_psnr,
            ssim: s.mean_ssim,
            vmaf: s.vmaf.as_ref().map(|v| v.score),
        }
    }
}

/// Per-clip means recomputed from the flat table, in first-appearance order.
pub fn clip_means(rows: &[FlatRow]) -> Vec<ClipMean> {
    let mut order: Vec<(Version, String)> = Vec::new();
    let mut acc: BTreeMap<(Version, String), (TextureClass, f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        let key = (r.version, r.clip_id.clone());
        let e = acc.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (r.class, 0.0, 0.0, 0)
        });
        e.1 += r.psnr;
        e.2 += r.ssim;
        e.3 += 1;
    }
    order
        .into_iter()
        .map(|key| {
            let (class, psnr, ssim, n) = acc[&key];
            ClipMean {
                version: key.0,
                clip_id: key.1,
                class,
                psnr: psnr / n as f64,
                ssim: ssim / n as f64,
                vmaf: None,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Static,
    Dyndis,
    Dyncon,
    Overall,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::Static, Group::Dyndis, Group::Dyncon, Group::Overall];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Static => "static",
            Group::Dyndis => "dyndis",
            Group::Dyncon => "dyncon",
            Group::Overall => "overall",
        }
    }

    pub fn contains(self, class: TextureClass) -> bool {
        match self {
            Group::Overall => true,
            Group::Static => class == TextureClass::Static,
            Group::Dyndis => class == TextureClass::Dyndis,
            Group::Dyncon => class == TextureClass::Dyncon,
        }
    }
}

impl From<TextureClass> for Group {
    fn from(class: TextureClass) -> Self {
        match class {
            TextureClass::Static => Group::Static,
            TextureClass::Dyndis => Group::Dyndis,
            TextureClass::Dyncon => Group::Dyncon,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mean over the clips of one group; `delta` is relative to the baseline version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub version: Version,
    pub group: Group,
    pub metric: Metric,
    pub clips: usize,
    pub mean: f64,
    pub delta: Option<f64>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn group_values(means: &[ClipMean], version: Version, group: Group, metric: Metric) -> Vec<f64> {
    means
        .iter()
        .filter(|m| m.version == version && group.contains(m.class))
        .filter_map(|m| m.get(metric))
        .collect()
}

fn versions_in(means: &[ClipMean]) -> Vec<Version> {
    let mut versions: Vec<Version> = means.iter().map(|m| m.version).collect();
    versions.sort_unstable();
    versions.dedup();
    versions
}

/// Group means of per-clip means for every version, group and metric with data.
pub fn aggregate(means: &[ClipMean]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for version in versions_in(means) {
        for group in Group::ALL {
            for metric in [Metric::Psnr, Metric::Ssim, Metric::Vmaf] {
                let values = group_values(means, version, group, metric);
                if values.is_empty() {
                    continue;
                }
                let base = group_values(means, Version::Baseline, group, metric);
                let m = mean(&values);
                out.push(Aggregate {
                    version,
                    group,
                    metric,
                    clips: values.len(),
                    mean: m,
                    delta: (!base.is_empty()).then(|| m - mean(&base)),
                });
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Anova,
    Welch,
}

/// One significance test over per-clip means of a version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatTest {
    pub version: Version,
    pub metric: Metric,
    pub kind: TestKind,
    pub groups: Vec<TextureClass>,
    /// F for ANOVA, t for Welch; `None` when the test is undefined on this data.
    pub statistic: Option<f64>,
    pub df1: Option<f64>,
    pub df2: Option<f64>,
    pub p: Option<f64>,
    pub significant: Option<bool>,
    pub note: Option<String>,
}

/// Class pairs of the pairwise comparisons.
pub const WELCH_PAIRS: [(TextureClass, TextureClass); 3] = [
    (TextureClass::Dyndis, TextureClass::Dyncon),
    (TextureClass::Static, TextureClass::Dyncon),
    (TextureClass::Static, TextureClass::Dyndis),
];

/// One-way ANOVA across classes and Welch tests for the three class pairs,
/// per version and metric.
pub fn statistical_tests(means: &[ClipMean], alpha: f64) -> Vec<StatTest> {
    let mut out = Vec::new();
    for version in versions_in(means) {
        for metric in [Metric::Psnr, Metric::Ssim, Metric::Vmaf] {
            let by_class: Vec<(TextureClass, Vec<f64>)> = TextureClass::ALL
                .iter()
                .map(|&c| (c, group_values(means, version, c.into(), metric)))
                .filter(|(_, v)| !v.is_empty())
                .collect();
            if by_class.is_empty() {
                continue;
            }
            let groups: Vec<&[f64]> = by_class.iter().map(|(_, v)| v.as_slice()).collect();
            let classes: Vec<TextureClass> = by_class.iter().map(|(c, _)| *c).collect();
            let blank = |kind, groups| StatTest {
                version,
                metric,
                kind,
                groups,
                statistic: None,
                df1: None,
                df2: None,
                p: None,
                significant: None,
                note: None,
            };
            out.push(match one_way_anova(&groups) {
                Ok(r) => StatTest {
                    statistic: Some(r.f_stat),
                    df1: Some(r.df_between as f64),
                    df2: Some(r.df_within as f64),
                    p: Some(r.p_value),
                    significant: Some(r.p_value < alpha),
                    ..blank(TestKind::Anova, classes.clone())
                },
                Err(e) => StatTest {
                    note: Some(e.to_string()),
                    ..blank(TestKind::Anova, classes)
                },
            });
            for (a, b) in WELCH_PAIRS {
                let find = |c| by_class.iter().find(|(k, _)| *k == c).map(|(_, v)| v);
                let (Some(x), Some(y)) = (find(a), find(b)) else {
                    continue;
                };
                out.push(match welch_t_test(x, y) {
                    Ok(r) => StatTest {
                        statistic: Some(r.t_stat),
                        df1: Some(r.df),
                        p: Some(r.p_value),
                        significant: Some(r.p_value < alpha),
                        ..blank(TestKind::Welch, vec![a, b])
                    },
                    Err(e) => StatTest {
                        note: Some(e.to_string()),
                        ..blank(TestKind::Welch, vec![a, b])
                    },
                });
            }
        }
    }
    out
}

/// Five-number summary with linearly interpolated quartiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn five_number_summary(values: &[f64]) -> Option<FiveNumber> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    };
    Some(FiveNumber {
        min: v[0],
        q1: q(0.25),
        median: q(0.5),
        q3: q(0.75),
        max: v[v.len() - 1],
    })
}

/// Box-plot data of per-clip means for one version, group and metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub version: Version,
    pub group: Group,
    pub metric: Metric,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn distribution(means: &[ClipMean]) -> Vec<Distribution> {
    let mut out = Vec::new();
    for version in versions_in(means) {
        for group in Group::ALL {
            for metric in [Metric::Psnr, Metric::Ssim, Metric::Vmaf] {
                let values = group_values(means, version, group, metric);
                if let Some(s) = five_number_summary(&values) {
                    out.push(Distribution {
                        version,
                        group,
                        metric,
                        n: values.len(),
                        min: s.min,
                        q1: s.q1,
                        median: s.median,
                        q3: s.q3,
                        max: s.max,
                    });
                }
            }
        }
    }
    out
}
