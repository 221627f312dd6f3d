use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::summary::{write_flat_scores, Group, Metric, StatTest, TestKind};
use super::{BenchError, BenchReport, Version};

pub const FLAT_SCORES_FILE: &str = "scores.csv";
const TABLE_FILE: &str = "report.md";
const DISTRIBUTION_FILE: &str = "distribution.csv";
const JSON_FILE: &str = "report.json";

/// Paths written by [`emit_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReportFiles {
    pub scores: PathBuf,
    pub table: PathBuf,
    pub distribution: PathBuf,
    pub json: PathBuf,
}

/// `mean(+delta)` with `decimals` places; the delta is omitted when absent.
pub fn format_cell(mean: f64, delta: Option<f64>, decimals: usize) -> String {
    match delta {
        None => format!("{mean:.decimals$}"),
        Some(d) => {
            let mut rendered = format!("{d:+.decimals$}");
            if rendered.starts_with('-') && rendered[1..].chars().all(|c| c == '0' || c == '.') {
                rendered.replace_range(0..1, "+");
            }
            format!("{mean:.decimals$}({rendered})")
        }
    }
}

/// p-value rounded to two decimals, e.g. `p=0.00`.
pub fn format_p(p: f64) -> String {
    format!("p={p:.2}")
}

fn metrics_present(report: &BenchReport) -> Vec<Metric> {
    [Metric::Psnr, Metric::Ssim, Metric::Vmaf]
        .into_iter()
        .filter(|&m| report.aggregates.iter().any(|a| a.metric == m))
        .collect()
}

/// Comparison table: one row per version, one column per group and metric,
/// bracketed deltas against the baseline and the best value of each column in bold.
pub fn render_table(report: &BenchReport) -> String {
    let metrics = metrics_present(report);
    let groups: Vec<Group> = Group::ALL
        .into_iter()
        .filter(|&g| report.aggregates.iter().any(|a| a.group == g))
        .collect();
    let columns: Vec<(Group, Metric)> = groups
        .iter()
        .flat_map(|&g| metrics.iter().map(move |&m| (g, m)))
        .collect();
    let versions: Vec<Version> = report.versions.iter().map(|v| v.version).collect();

    let mut out = String::new();
    out.push_str("| version |");
    for (g, m) in &columns {
        let _ = write!(out, " {g} {} |", m.as_str().to_uppercase());
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(columns.len()));
    out.push('\n');

    let best: Vec<Option<f64>> = columns
        .iter()
        .map(|&(g, m)| {
            versions
                .iter()
                .filter_map(|&v| report.aggregate(v, g, m).map(|a| a.mean))
                .fold(None, |acc: Option<f64>, x| {
                    Some(acc.map_or(x, |b| b.max(x)))
                })
        })
        .collect();
    for &v in &versions {
        let _ = write!(out, "| {v} |");
        for (i, &(g, m)) in columns.iter().enumerate() {
            match report.aggregate(v, g, m) {
                Some(a) => {
                    let delta = if v == Version::Baseline {
                        None
                    } else {
                        a.delta
                    };
                    let cell = format_cell(a.mean, delta, m.decimals());
                    if Some(a.mean) == best[i] {
                        let _ = write!(out, " **{cell}** |");
                    } else {
                        let _ = write!(out, " {cell} |");
                    }
                }
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}

fn render_test(t: &StatTest) -> String {
    let groups: Vec<&str> = t.groups.iter().map(|c| c.as_str()).collect();
    let (name, sep) = match t.kind {
        TestKind::Anova => ("anova", " / "),
        TestKind::Welch => ("welch", " vs "),
    };
    let result = match (t.statistic, t.p) {
        (Some(stat), Some(p)) => {
            let head = match t.kind {
                TestKind::Anova => format!(
                    "F({:.0},{:.0})={stat:.2}",
                    t.df1.unwrap_or(f64::NAN),
                    t.df2.unwrap_or(f64::NAN)
                ),
                TestKind::Welch => format!("t({:.2})={stat:.2}", t.df1.unwrap_or(f64::NAN)),
            };
            let sig = if t.significant == Some(true) {
                "yes"
            } else {
                "no"
            };
            format!("{head} | {} | {sig}", format_p(p))
        }
        _ => format!("n/a | - | {}", t.note.as_deref().unwrap_or("undefined")),
    };
    format!(
        "| {} | {} | {name} | {} | {result} |",
        t.version,
        t.metric,
        groups.join(sep)
    )
}

/// Significance tests as a table with statistics and p-values rounded to two decimals.
pub fn render_stats(tests: &[StatTest], alpha: f64) -> String {
    let mut out = format!("Significance level alpha = {alpha}\n\n");
    out.push_str("| version | metric | test | groups | statistic | p | significant |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    for t in tests {
        out.push_str(&render_test(t));
        out.push('\n');
    }
    out
}

fn create(path: &Path) -> Result<BufWriter<File>, BenchError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| BenchError::WriteFailed {
            path: path.to_path_buf(),
            source,
        })
}

fn write_text(path: &Path, text: &str) -> Result<(), BenchError> {
    std::fs::write(path, text).map_err(|source| BenchError::WriteFailed {
        path: path.to_path_buf(),
        source,
    })
}

fn render_markdown(report: &BenchReport) -> String {
    let mut out = String::from("# Benchmark report\n\n");
    let n = report.run.clips.len();
    let _ = writeln!(
        out,
        "{n} clips, {} versions. Cells are means of per-clip means; brackets give the change \
         with respect to the baseline; the best value of each column is in bold.\n",
        report.versions.len()
    );
    if !report.run.vmaf_versions.is_empty() {
        let _ = writeln!(
            out,
            "VMAF tool version: {}\n",
            report.run.vmaf_versions.join(", ")
        );
    }
    out.push_str("## Scores\n\n");
    out.push_str(&render_table(report));
    out.push_str("\n## Routing\n\n");
    for vs in &report.versions {
        if vs.version.profile().is_some() {
            continue;
        }
        let fallbacks = vs
            .scores
            .iter()
            .filter(|s| {
                let routed = match vs.version {
                    Version::TafiClassifier => s.predicted,
                    _ => s.label.or(s.predicted),
                };
                routed.map(Into::into) != s.profile
            })
            .count();
        let _ = writeln!(
            out,
            "- {}: {} clips, {fallbacks} routed to a fallback profile",
            vs.version,
            vs.scores.len()
        );
    }
    let labelled: Vec<_> = report
        .versions
        .first()
        .map(|vs| vs.scores.iter().filter(|s| s.label.is_some()).collect())
        .unwrap_or_default();
    if !labelled.is_empty() {
        let agree = labelled.iter().filter(|s| s.label == s.predicted).count();
        let _ = writeln!(
            out,
            "- classifier agreement with labels: {agree}/{}",
            labelled.len()
        );
    }
    out.push_str("\n## Statistics\n\n");
    out.push_str(&render_stats(
        &report.tests,
        report.run.config.benchmark.alpha,
    ));
    out
}

/// Writes the flat per-frame scores, the markdown report, the distribution
/// summary and the full JSON report into `dir`.
pub fn emit_report(report: &BenchReport, dir: &Path) -> Result<ReportFiles, BenchError> {
    std::fs::create_dir_all(dir).map_err(|source| BenchError::WriteFailed {
        path: dir.to_path_buf(),
        source,
    })?;
    let files = ReportFiles {
        scores: dir.join(FLAT_SCORES_FILE),
        table: dir.join(TABLE_FILE),
        distribution: dir.join(DISTRIBUTION_FILE),
        json: dir.join(JSON_FILE),
    };

    write_flat_scores(&report.flat_rows(), create(&files.scores)?)?;
    write_text(&files.table, &render_markdown(report))?;

    let mut w = csv::Writer::from_writer(create(&files.distribution)?);
    for d in &report.distributions {
        w.serialize(d)
            .map_err(|e| BenchError::ScoresFormat(e.to_string()))?;
    }
    w.flush().map_err(|source| BenchError::WriteFailed {
        path: files.distribution.clone(),
        source,
    })?;

    let json = serde_json::to_string_pretty(report)
        .map_err(|e| BenchError::ScoresFormat(e.to_string()))?;
    write_text(&files.json, &json)?;
    Ok(files)
}
