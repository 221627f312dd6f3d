//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and fails if any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use tafi_core::bench::{
    emit_report, evaluate_clip, run_benchmark, synth_split, tune_profiles, write_corpus,
    BenchReport, Config, Group, Manifest, Metric, TestKind, Version,
};
use tafi_core::interp::{estimate_motion, InterpParams, MotionVector};
use tafi_core::media::{read_y4m, write_y4m, Clip, Frame, FrameRate, Plane};
use tafi_core::metrics::{psnr, ssim};
use tafi_core::stats::{one_way_anova, reg_inc_beta, welch_t_test};
use tafi_core::tafi::{ProfileKey, TunedProfileSet};
use tafi_core::TextureClass;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn flat(value: u8) -> Frame {
    Frame::from_luma(Plane::filled(64, 64, value)).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn metric_fixtures() -> Outcome {
    let p16 = psnr(&flat(0), &flat(16)).unwrap().db;
    let p255 = psnr(&flat(0), &flat(255)).unwrap().db;
    let s = ssim(&flat(100), &flat(110)).unwrap();
    let textured = Frame::from_luma(Plane::from_fn(64, 64, |x, y| {
        ((x * 37 + y * 91) % 256) as u8
    }))
    .unwrap();
    let id = ssim(&textured, &textured).unwrap();
    let pass = close(p16, 24.048, 1e-3)
        && close(p255, 0.0, 1e-9)
        && close(s, 0.99548, 1e-5)
        && close(id, 1.0, 1e-9);
    Outcome::new(
        pass,
        format!(
            "psnr(0,16)={p16:.6} psnr(0,255)={p255:.2e} ssim(100,110)={s:.6} ssim(x,x)={id:.12}"
        ),
    )
}

fn statistics_fixtures() -> Outcome {
    let a = one_way_anova(&[[1.0, 2.0, 3.0], [2.0, 3.0, 4.0], [3.0, 4.0, 5.0]]).unwrap();
    let anova_ok = close(a.f_stat, 3.0, 1e-9)
        && (a.df_between, a.df_within) == (2, 6)
        && close(a.p_value, 0.125, 1e-9);

    let w = welch_t_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
    let reference = {
        let dist = StudentsT::new(0.0, 1.0, w.df).unwrap();
        2.0 * dist.cdf(-w.t_stat.abs())
    };
    let welch_ok = close(w.t_stat, -3.6742, 1e-4)
        && close(w.df, 4.0, 1e-9)
        && close(w.p_value, 0.0213, 1e-3)
        && close(w.p_value, reference, 1e-9);

    let mut rng = ChaCha8Rng::seed_from_u64(0xBE7A);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let x: f64 = rng.gen_range(0.0..=1.0);
        let aa: f64 = rng.gen_range(0.05..60.0);
        let bb: f64 = rng.gen_range(0.05..60.0);
        worst = worst.max((reg_inc_beta(x, 1.0, 1.0).unwrap() - x).abs());
        let sum = reg_inc_beta(x, aa, bb).unwrap() + reg_inc_beta(1.0 - x, bb, aa).unwrap();
        worst = worst.max((sum - 1.0).abs());
    }
    let beta_ok = worst <= 1e-9;
    Outcome::new(
        anova_ok && welch_ok && beta_ok,
        format!(
            "anova F={:.12} df=({},{}) p={:.12}; welch t={:.6} df={:.12} p={:.6} (statrs {:.6}); \
             beta identities max err {worst:.1e}",
            a.f_stat, a.df_between, a.df_within, a.p_value, w.t_stat, w.df, w.p_value, reference
        ),
    )
}

/// Exhaustive minimum-SAD search with edge-replicated reference and the
/// (SAD, |v|_1, dy, dx) tie-break.
fn brute_force(prev: &Plane, next: &Plane, block: usize, range: i32) -> Vec<MotionVector> {
    let mut out = Vec::new();
    for by in 0..prev.height().div_ceil(block) {
        for bx in 0..prev.width().div_ceil(block) {
            let mut best: Option<(u32, u32, i32, i32)> = None;
            for dy in -range..=range {
                for dx in -range..=range {
                    let mut sad = 0u32;
                    for y in by * block..((by + 1) * block).min(prev.height()) {
                        for x in bx * block..((bx + 1) * block).min(prev.width()) {
                            let q = next
                                .get_clamped(x as isize + dx as isize, y as isize + dy as isize);
                            sad += prev.get(x, y).abs_diff(q) as u32;
                        }
                    }
                    let key = (sad, dx.unsigned_abs() + dy.unsigned_abs(), dy, dx);
                    if best.is_none_or(|b| key < b) {
                        best = Some(key);
                    }
                }
            }
            let (_, _, dy, dx) = best.unwrap();
            out.push(MotionVector::new(dx, dy));
        }
    }
    out
}

fn motion_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut mismatches = 0;
    for case in 0..100 {
        let block = [8, 16, 32][case % 3];
        let range = rng.gen_range(1..=6);
        let levels: u8 = if case % 2 == 0 { 255 } else { 4 };
        let prev = Plane::from_fn(32, 32, |_, _| rng.gen_range(0..=levels));
        let (sx, sy) = (rng.gen_range(-5..=5isize), rng.gen_range(-5..=5isize));
        let next = Plane::from_fn(32, 32, |x, y| {
            let v = prev.get_clamped(x as isize - sx, y as isize - sy);
            if rng.gen_bool(0.1) {
                rng.gen_range(0..=levels)
            } else {
                v
            }
        });
        let params = InterpParams {
            block_size: block,
            search_range: range as usize,
            smoothness_lambda: 0.0,
            ..Default::default()
        };
        let field = estimate_motion(
            &Frame::from_luma(prev.clone()).unwrap(),
            &Frame::from_luma(next.clone()).unwrap(),
            &params,
        )
        .unwrap();
        if field.vectors() != brute_force(&prev, &next, block, range).as_slice() {
            mismatches += 1;
        }
    }
    Outcome::new(
        mismatches == 0,
        format!("{mismatches}/100 pairs differ from exhaustive search"),
    )
}

fn counting() -> Outcome {
    let still = |len| {
        let f = Frame::from_luma(Plane::from_fn(32, 32, |x, y| (x * 5 + y * 3) as u8)).unwrap();
        Clip::new("c", vec![f; len], FrameRate::new(25, 1).unwrap()).unwrap()
    };
    let p = InterpParams::default();
    let long = evaluate_clip(&still(250), &p).unwrap();
    let short = evaluate_clip(&still(3), &p).unwrap();
    let last = long.records.last().map(|r| r.frame_index);
    Outcome::new(
        long.frames_evaluated == 124
            && long.records.len() == 124
            && last == Some(247)
            && short.records.len() == 1,
        format!(
            "250 frames -> {} records (last t={last:?}); 3 frames -> {}",
            long.records.len(),
            short.records.len()
        ),
    )
}

fn y4m_round_trip() -> Outcome {
    let mut runner = TestRunner::new(ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        ..ProptestConfig::default()
    });
    let strategy = (
        1usize..=12,
        1usize..=10,
        1usize..=4,
        any::<u64>(),
        1u32..=60000,
        1u32..=1001,
    );
    let result = runner.run(&strategy, |(hw, hh, n, seed, num, den)| {
        let (w, h) = (2 * hw, 2 * hh);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames: Vec<Frame> = (0..n)
            .map(|_| {
                let mut plane = |pw, ph| Plane::from_fn(pw, ph, |_, _| rng.gen());
                let y = plane(w, h);
                let u = plane(w / 2, h / 2);
                let v = plane(w / 2, h / 2);
                Frame::new(y, u, v).unwrap()
            })
            .collect();
        let clip = Clip::new("rt", frames, FrameRate::new(num, den).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_y4m(&clip, &mut buf).unwrap();
        let back = read_y4m(buf.as_slice()).unwrap();
        prop_assert_eq!(back.frames(), clip.frames());
        prop_assert_eq!(back.fps(), clip.fps());
        let mut again = Vec::new();
        write_y4m(&back, &mut again).unwrap();
        prop_assert_eq!(again, buf);
        Ok(())
    });
    match result {
        Ok(()) => Outcome::new(true, "1000 randomized clips round-tripped bit-exactly"),
        Err(e) => Outcome::new(false, format!("{e}")),
    }
}

struct PipelineRun {
    scores: Vec<u8>,
    profiles: Vec<u8>,
    report: BenchReport,
    elapsed: Duration,
}

/// synth -> tune -> evaluate with the default configuration, through files.
fn run_pipeline(dir: &Path) -> PipelineRun {
    let start = Instant::now();
    let config = Config::default();
    let (train, test) = synth_split(&config.synth).unwrap();
    write_corpus(&train, &dir.join("train"), &dir.join("train.toml")).unwrap();
    write_corpus(&test, &dir.join("test"), &dir.join("test.toml")).unwrap();
    drop((train, test));

    let train = Manifest::load(&dir.join("train.toml"))
        .unwrap()
        .load_clips()
        .unwrap();
    let keys = [
        ProfileKey::Static,
        ProfileKey::Dyndis,
        ProfileKey::Dyncon,
        ProfileKey::Mixed,
    ];
    let profiles = tune_profiles(&train, &config, &keys).unwrap();
    let profile_path = dir.join("profiles.toml");
    profiles.save(&profile_path).unwrap();
    drop(train);

    let manifest = Manifest::load(&dir.join("test.toml")).unwrap();
    let profiles = TunedProfileSet::load(&profile_path).unwrap();
    let report = run_benchmark(&manifest, &profiles, &config).unwrap();
    let files = emit_report(&report, &dir.join("report")).unwrap();
    let elapsed = start.elapsed();
    PipelineRun {
        scores: std::fs::read(files.scores).unwrap(),
        profiles: std::fs::read(profile_path).unwrap(),
        report,
        elapsed,
    }
}

fn psnr_mean(report: &BenchReport, version: Version, group: Group) -> f64 {
    report.aggregate(version, group, Metric::Psnr).unwrap().mean
}

fn baseline_ordering(report: &BenchReport) -> Outcome {
    let m: Vec<f64> = [Group::Static, Group::Dyndis, Group::Dyncon]
        .iter()
        .map(|&g| psnr_mean(report, Version::Baseline, g))
        .collect();
    let anova = report
        .tests
        .iter()
        .find(|t| {
            t.version == Version::Baseline && t.metric == Metric::Psnr && t.kind == TestKind::Anova
        })
        .unwrap();
    let p = anova.p.unwrap_or(1.0);
    Outcome::new(
        m[0] > m[1] && m[1] > m[2] && p < 0.05,
        format!(
            "baseline PSNR static {:.3} > dyndis {:.3} > dyncon {:.3}; ANOVA F({:.0},{:.0})={:.2}, p={p:.3e}",
            m[0],
            m[1],
            m[2],
            anova.df1.unwrap_or(f64::NAN),
            anova.df2.unwrap_or(f64::NAN),
            anova.statistic.unwrap_or(f64::NAN)
        ),
    )
}

fn specialization(report: &BenchReport) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for class in TextureClass::ALL {
        let own = psnr_mean(report, class.into(), class.into());
        let mixed = psnr_mean(report, Version::Mixed, class.into());
        pass &= own >= mixed;
        parts.push(format!("{class}: own {own:.3} vs mixed {mixed:.3}"));
    }
    let tafi = psnr_mean(report, Version::Tafi, Group::Overall);
    let mixed = psnr_mean(report, Version::Mixed, Group::Overall);
    let base = psnr_mean(report, Version::Baseline, Group::Overall);
    pass &= tafi > mixed && tafi > base;
    parts.push(format!(
        "overall TAFI {tafi:.3} vs mixed {mixed:.3} ({:+.3} dB) vs baseline {base:.3} ({:+.3} dB)",
        tafi - mixed,
        tafi - base
    ));
    Outcome::new(pass, parts.join("; "))
}

fn overfitting(report: &BenchReport) -> Outcome {
    let mut holds = 0;
    let mut parts = Vec::new();
    for class in TextureClass::ALL {
        let own = psnr_mean(report, class.into(), class.into());
        let off: Vec<(TextureClass, f64)> = TextureClass::ALL
            .into_iter()
            .filter(|&o| o != class)
            .map(|o| (o, psnr_mean(report, o.into(), class.into())))
            .collect();
        let ok = off.iter().all(|&(_, v)| v < own);
        holds += usize::from(ok);
        parts.push(format!(
            "{class}: own {own:.3}, {} {:.3}, {} {:.3}{}",
            off[0].0,
            off[0].1,
            off[1].0,
            off[1].1,
            if ok { "" } else { " (not below)" }
        ));
    }
    Outcome::new(
        holds >= 2,
        format!("{holds}/3 classes; {}", parts.join("; ")),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |n, name, outcome: Outcome| {
        println!(
            "criterion {n:>2} [{}] {name}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        results.push((n, name, outcome));
    };

    record(1, "metric fixtures", metric_fixtures());
    record(2, "statistics fixtures", statistics_fixtures());
    record(3, "motion oracle", motion_oracle());
    record(7, "protocol counting", counting());
    record(10, "y4m round trip", y4m_round_trip());

    let first_dir = tempfile::tempdir().unwrap();
    let first = run_pipeline(first_dir.path());
    record(
        4,
        "baseline class ordering",
        baseline_ordering(&first.report),
    );
    record(5, "specialization gain", specialization(&first.report));
    record(6, "off-class degradation", overfitting(&first.report));
    record(
        9,
        "runtime budget",
        Outcome::new(
            first.elapsed < Duration::from_secs(600),
            format!(
                "full pipeline {:.1} s on {} worker thread(s) (limit 600 s)",
                first.elapsed.as_secs_f64(),
                rayon::current_num_threads()
            ),
        ),
    );

    let second_dir = tempfile::tempdir().unwrap();
    let second = run_pipeline(second_dir.path());
    record(
        8,
        "determinism",
        Outcome::new(
            first.scores == second.scores && first.profiles == second.profiles,
            format!(
                "scores table {} bytes identical: {}; profile file identical: {}",
                first.scores.len(),
                first.scores == second.scores,
                first.profiles == second.profiles
            ),
        ),
    );

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
