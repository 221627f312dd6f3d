use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tafi_core::interp::{estimate_motion, interpolate, InterpParams, Mode, MotionVector};
use tafi_core::media::{Frame, Plane};
use tafi_core::metrics::psnr;

fn median(a: i32, b: i32, c: i32) -> i32 {
    let mut v = [a, b, c];
    v.sort();
    v[1]
}

/// Raster-order exhaustive search with the median-predictor penalty.
fn reference_search(
    prev: &Plane,
    next: &Plane,
    block: usize,
    range: i32,
    lambda: f64,
) -> Vec<MotionVector> {
    let gw = prev.width().div_ceil(block);
    let gh = prev.height().div_ceil(block);
    let mut out: Vec<MotionVector> = Vec::new();
    for by in 0..gh {
        for bx in 0..gw {
            let nb = |x: Option<usize>, y: Option<usize>| match (x, y) {
                (Some(x), Some(y)) if x < gw => out[y * gw + x],
                _ => MotionVector::ZERO,
            };
            let l = nb(bx.checked_sub(1), Some(by));
            let t = nb(Some(bx), by.checked_sub(1));
            let tr = nb(Some(bx + 1), by.checked_sub(1));
            let (px, py) = (median(l.dx, t.dx, tr.dx), median(l.dy, t.dy, tr.dy));
            let mut best: Option<(f64, u32, i32, i32)> = None;
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
                    let cost = sad as f64 + lambda * ((dx - px).abs() + (dy - py).abs()) as f64;
                    let key = (cost, dx.unsigned_abs() + dy.unsigned_abs(), dy, dx);
                    if best.is_none_or(|b| key.partial_cmp(&b) == Some(std::cmp::Ordering::Less)) {
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

fn frame(p: Plane) -> Frame {
    Frame::from_luma(p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn matches_reference_search(
        seed in any::<u64>(),
        hw in 4usize..=20,
        hh in 4usize..=20,
        block_idx in 0usize..3,
        range in 0i32..=5,
        lambda in prop_oneof![Just(0.0), Just(1.0), Just(16.0), 0.0f64..300.0],
        levels in prop_oneof![Just(1u8), Just(3u8), Just(255u8)],
    ) {
        let (w, h) = (2 * hw, 2 * hh);
        let block = [8, 16, 32][block_idx];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prev = Plane::from_fn(w, h, |_, _| rng.gen_range(0..=levels));
        let (sx, sy) = (rng.gen_range(-4..=4isize), rng.gen_range(-4..=4isize));
        let next = Plane::from_fn(w, h, |x, y| {
            if rng.gen_bool(0.05) { rng.gen_range(0..=levels) } else { prev.get_clamped(x as isize - sx, y as isize - sy) }
        });
        let params = InterpParams {
            block_size: block,
            search_range: range as usize,
            smoothness_lambda: lambda,
            ..Default::default()
        };
        let field = estimate_motion(&frame(prev.clone()), &frame(next.clone()), &params).unwrap();
        let expected = reference_search(&prev, &next, block, range, lambda);
        prop_assert_eq!(field.vectors(), expected.as_slice());
        prop_assert!(field.vectors().iter().all(|v| v.dx.abs() <= range && v.dy.abs() <= range));
    }
}

#[test]
fn global_shift_is_recovered() {
    let texture = |x: isize, y: isize| {
        let (x, y) = (x as f64, y as f64);
        (128.0 + 60.0 * (x * 0.37).sin() * (y * 0.23).cos() + 40.0 * ((x + 2.0 * y) * 0.11).sin())
            as u8
    };
    let prev = Plane::from_fn(96, 96, |x, y| texture(x as isize, y as isize));
    let next = Plane::from_fn(96, 96, |x, y| texture(x as isize - 4, y as isize));
    let params = InterpParams {
        search_range: 6,
        ..Default::default()
    };
    let field = estimate_motion(&frame(prev), &frame(next), &params).unwrap();
    for by in 1..field.grid_h() - 1 {
        for bx in 1..field.grid_w() - 1 {
            assert_eq!(
                field.get(bx, by),
                MotionVector::new(4, 0),
                "block ({bx},{by})"
            );
        }
    }
}

#[test]
fn mci_beats_frame_average_on_translation() {
    let texture =
        |x: f64, y: f64| 128.0 + 50.0 * (x * 0.3).sin() + 40.0 * (y * 0.21 + x * 0.05).cos();
    let at = |t: f64| {
        frame(Plane::from_fn(64, 64, |x, y| {
            texture(x as f64 - 2.0 * t, y as f64) as u8
        }))
    };
    let (prev, mid, next) = (at(0.0), at(1.0), at(2.0));
    let mci = interpolate(
        &prev,
        &next,
        &InterpParams {
            search_range: 8,
            ..Default::default()
        },
    )
    .unwrap();
    let avg = interpolate(
        &prev,
        &next,
        &InterpParams {
            mode: Mode::FrameAverage,
            ..Default::default()
        },
    )
    .unwrap();
    let (p_mci, p_avg) = (psnr(&mid, &mci).unwrap().db, psnr(&mid, &avg).unwrap().db);
    assert!(p_mci > p_avg + 3.0, "mci {p_mci} vs average {p_avg}");
}
