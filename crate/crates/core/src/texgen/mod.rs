//! Deterministic synthetic texture clips.
//!
//! Each class has its own motion model:
//!
//! * `static`: a fixed procedural plane seen through one smoothly varying
//!   similarity warp (pan, small rotation and zoom), bilinearly resampled.
//! * `dyndis`: textured rigid discs swaying on independent trajectories over
//!   a textured background, occluding each other in index order.
//! * `dyncon`: multi-octave 3D gradient noise domain-warped by a slowly
//!   evolving displacement field, so local motion varies continuously in
//!   direction and the texture itself keeps changing.
//!
//! Output is a pure function of the [`SynthSpec`].

mod noise;

pub use noise::GradientNoise;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::{Clip, Frame, FrameRate, Plane};
use crate::texclass::TextureClass;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
}

/// Parameters of one synthetic clip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub class: TextureClass,
    pub width: usize,
    pub height: usize,
    pub n_frames: usize,
    pub fps: FrameRate,
    /// Peak speed of the dominant motion, pixels/frame.
    pub motion_amplitude: f64,
    /// Spatial frequency multiplier of the procedural texture (1.0 = 18 px base period).
    pub detail_scale: f64,
    /// Number of moving parts (dyndis only).
    pub n_sprites: usize,
    /// Strength of the displacement field (dyncon only).
    pub advect_turbulence: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Desk-scale defaults: 192x192, 96 frames at 25 fps.
    pub fn new(class: TextureClass, seed: u64) -> Self {
        Self {
            class,
            width: 192,
            height: 192,
            n_frames: 96,
            fps: FrameRate { num: 25, den: 1 },
            motion_amplitude: 2.5,
            detail_scale: 1.0,
            n_sprites: 6,
            advect_turbulence: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        if self.width == 0 || self.height == 0 || !self.width.is_multiple_of(2) || !self.height.is_multiple_of(2) {
            return bad(format!(
                "geometry {}x{} must be even and non-zero",
                self.width, self.height
            ));
        }
        if self.n_frames < 3 {
            return bad(format!("n_frames {} < 3", self.n_frames));
        }
        if !(self.motion_amplitude.is_finite() && self.motion_amplitude >= 0.0) {
            return bad(format!(
                "motion_amplitude {} must be >= 0",
                self.motion_amplitude
            ));
        }
        if !(self.detail_scale.is_finite() && self.detail_scale > 0.0) {
            return bad(format!("detail_scale {} must be > 0", self.detail_scale));
        }
        if !(self.advect_turbulence.is_finite() && self.advect_turbulence >= 0.0) {
            return bad(format!(
                "advect_turbulence {} must be >= 0",
                self.advect_turbulence
            ));
        }
        if self.class == TextureClass::Dyndis && self.n_sprites < 2 {
            return bad(format!(
                "dyndis needs at least 2 sprites, got {}",
                self.n_sprites
            ));
        }
        if self.fps.num == 0 || self.fps.den == 0 {
            return bad(format!("frame rate {} is invalid", self.fps));
        }
        Ok(())
    }
}

const CONTRAST: f64 = 190.0;
const BASE_PERIOD: f64 = 18.0;
const OCTAVES: u32 = 4;

fn to_gray(v: f64) -> u8 {
    (128.0 + CONTRAST * v).round().clamp(0.0, 255.0) as u8
}

/// Rounded bilinear sample with edge clamping.
pub fn bilinear(plane: &Plane, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let (fx, fy) = (x - x0, y - y0);
    let (ix, iy) = (x0 as isize, y0 as isize);
    let p = |dx, dy| plane.get_clamped(ix + dx, iy + dy) as f64;
    let top = p(0, 0) + fx * (p(1, 0) - p(0, 0));
    let bottom = p(0, 1) + fx * (p(1, 1) - p(0, 1));
    top + fy * (bottom - top)
}

/// Chroma that follows the luma structure, so it moves with the content.
fn chroma_from_luma(luma: &Plane) -> (Plane, Plane) {
    let (cw, ch) = (luma.width() / 2, luma.height() / 2);
    let avg = |x: usize, y: usize| {
        (luma.get(2 * x, 2 * y) as f64
            + luma.get(2 * x + 1, 2 * y) as f64
            + luma.get(2 * x, 2 * y + 1) as f64
            + luma.get(2 * x + 1, 2 * y + 1) as f64)
            / 4.0
            - 128.0
    };
    let u = Plane::from_fn(cw, ch, |x, y| {
        (128.0 + 0.25 * avg(x, y)).round().clamp(0.0, 255.0) as u8
    });
    let v = Plane::from_fn(cw, ch, |x, y| {
        (128.0 - 0.2 * avg(x, y)).round().clamp(0.0, 255.0) as u8
    });
    (u, v)
}

fn frame_from_luma(luma: Plane) -> Frame {
    let (u, v) = chroma_from_luma(&luma);
    Frame::new(luma, u, v).expect("generator geometry")
}

/// Similarity transform `p -> center + scale * R(angle) * (p - center) + (tx, ty)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityWarp {
    pub center: (f64, f64),
    pub scale: f64,
    pub angle: f64,
    pub translation: (f64, f64),
}

impl SimilarityWarp {
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        (
            self.center.0 + self.scale * (c * dx - s * dy) + self.translation.0,
            self.center.1 + self.scale * (s * dx + c * dy) + self.translation.1,
        )
    }

    pub fn invert(&self, u: f64, v: f64) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (
            (u - self.translation.0 - self.center.0) / self.scale,
            (v - self.translation.1 - self.center.1) / self.scale,
        );
        (
            self.center.0 + c * dx + s * dy,
            self.center.1 - s * dx + c * dy,
        )
    }
}

struct StaticPath {
    omega: [f64; 4],
    phase: [f64; 4],
    dir: (f64, f64),
}

impl StaticPath {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        Self {
            omega: [
                rng.gen_range(0.04..0.09),
                rng.gen_range(0.04..0.09),
                rng.gen_range(0.03..0.07),
                rng.gen_range(0.03..0.07),
            ],
            phase: std::array::from_fn(|_| rng.gen_range(0.0..std::f64::consts::TAU)),
            dir: angle.sin_cos(),
        }
    }
}

fn static_path(spec: &SynthSpec) -> StaticPath {
    StaticPath::new(&mut ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5747_4943))
}

/// Warp mapping frame-`t` pixel coordinates onto the static texture plane.
pub fn static_warp(spec: &SynthSpec, t: usize) -> SimilarityWarp {
    let path = static_path(spec);
    warp_at(spec, &path, t as f64)
}

fn warp_at(spec: &SynthSpec, path: &StaticPath, t: f64) -> SimilarityWarp {
    let a = spec.motion_amplitude;
    let [w0, w1, w2, w3] = path.omega;
    let [p0, p1, p2, p3] = path.phase;
    // Velocity along the main direction oscillates between 0.3a and a, the cross component
    // stays within 0.35a; positions are closed-form integrals.
    let along = 0.65 * a * t + 0.35 * a / w0 * ((w0 * t + p0).sin() - p0.sin());
    let across = 0.35 * a / w1 * ((w1 * t + p1).sin() - p1.sin());
    let (dy, dx) = path.dir;
    SimilarityWarp {
        center: (spec.width as f64 / 2.0, spec.height as f64 / 2.0),
        scale: 1.0 + 0.006 * a * ((w3 * t + p3).sin() - p3.sin()),
        angle: 0.004 * a * ((w2 * t + p2).sin() - p2.sin()),
        translation: (along * dx - across * dy, along * dy + across * dx),
    }
}

fn synth_static(spec: &SynthSpec) -> Vec<Frame> {
    let path = static_path(spec);
    let warps: Vec<_> = (0..spec.n_frames)
        .map(|t| warp_at(spec, &path, t as f64))
        .collect();
    // Texture raster large enough to contain every warped frame.
    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for w in &warps {
        for (x, y) in [
            (0.0, 0.0),
            (spec.width as f64, 0.0),
            (0.0, spec.height as f64),
            (spec.width as f64, spec.height as f64),
        ] {
            let (u, v) = w.apply(x, y);
            lo_x = lo_x.min(u);
            lo_y = lo_y.min(v);
            hi_x = hi_x.max(u);
            hi_y = hi_y.max(v);
        }
    }
    let ox = (-lo_x).ceil() + 2.0;
    let oy = (-lo_y).ceil() + 2.0;
    let rw = (hi_x + ox).ceil() as usize + 3;
    let rh = (hi_y + oy).ceil() as usize + 3;
    let noise = GradientNoise::new(spec.seed);
    let f = spec.detail_scale / BASE_PERIOD;
    let raster = Plane::from_fn(rw, rh, |x, y| {
        to_gray(noise.fbm2((x as f64 - ox) * f, (y as f64 - oy) * f, OCTAVES))
    });
    warps
        .par_iter()
        .map(|w| {
            let luma = Plane::from_fn(spec.width, spec.height, |x, y| {
                let (u, v) = w.apply(x as f64, y as f64);
                bilinear(&raster, u + ox, v + oy).round() as u8
            });
            frame_from_luma(luma)
        })
        .collect()
}

struct Sprite {
    radius: f64,
    center: (f64, f64),
    swing: (f64, f64),
    omega: (f64, f64),
    phase: (f64, f64),
    texture: Plane,
}

impl Sprite {
    fn position(&self, t: f64) -> (f64, f64) {
        (
            self.center.0
                + self.swing.0 * ((self.omega.0 * t + self.phase.0).sin() - self.phase.0.sin()),
            self.center.1
                + self.swing.1 * ((self.omega.1 * t + self.phase.1).sin() - self.phase.1.sin()),
        )
    }
}

fn synth_dyndis(spec: &SynthSpec) -> Vec<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5350_5249);
    let f = spec.detail_scale / BASE_PERIOD;
    let bg_noise = GradientNoise::new(spec.seed);
    let background = Plane::from_fn(spec.width, spec.height, |x, y| {
        to_gray(0.6 * bg_noise.fbm2(x as f64 * f, y as f64 * f, OCTAVES))
    });
    let side = spec.width.min(spec.height) as f64;
    let a = spec.motion_amplitude;
    let sprites: Vec<Sprite> = (0..spec.n_sprites)
        .map(|k| {
            let radius = side * rng.gen_range(0.09..0.16);
            let speed = a * rng.gen_range(1.5..2.6);
            let heading: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let omega = (rng.gen_range(0.05..0.11), rng.gen_range(0.05..0.11));
            let swing = (
                speed * heading.cos() / omega.0,
                speed * heading.sin() / omega.1,
            );
            let noise = GradientNoise::new(spec.seed.wrapping_add(1 + k as u64));
            let size = (2.0 * radius).ceil() as usize + 4;
            let sf = f * rng.gen_range(1.2..2.0);
            let offset = rng.gen_range(-0.3..0.3);
            let texture = Plane::from_fn(size, size, |x, y| {
                to_gray(offset + noise.fbm2(x as f64 * sf, y as f64 * sf, OCTAVES))
            });
            Sprite {
                radius,
                center: (
                    rng.gen_range(0.0..spec.width as f64),
                    rng.gen_range(0.0..spec.height as f64),
                ),
                swing,
                omega,
                phase: (
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ),
                texture,
            }
        })
        .collect();

    (0..spec.n_frames)
        .into_par_iter()
        .map(|t| {
            let mut buf: Vec<f64> = background.data().iter().map(|&v| v as f64).collect();
            for s in &sprites {
                let (px, py) = s.position(t as f64);
                let half = (s.texture.width() / 2) as f64;
                let x0 = (px - s.radius - 1.0).floor().max(0.0) as usize;
                let y0 = (py - s.radius - 1.0).floor().max(0.0) as usize;
                let x1 = ((px + s.radius + 2.0).ceil().max(0.0) as usize).min(spec.width);
                let y1 = ((py + s.radius + 2.0).ceil().max(0.0) as usize).min(spec.height);
                for y in y0..y1 {
                    for x in x0..x1 {
                        let (dx, dy) = (x as f64 - px, y as f64 - py);
                        let alpha = (s.radius - dx.hypot(dy) + 0.5).clamp(0.0, 1.0);
                        if alpha > 0.0 {
                            let v = bilinear(&s.texture, dx + half, dy + half);
                            let cell = &mut buf[y * spec.width + x];
                            *cell += alpha * (v - *cell);
                        }
                    }
                }
            }
            let luma = Plane::new(
                spec.width,
                spec.height,
                buf.iter()
                    .map(|v| v.round().clamp(0.0, 255.0) as u8)
                    .collect(),
            )
            .expect("sprite frame geometry");
            frame_from_luma(luma)
        })
        .collect()
}

/// Displacement field grid step (pixels); the field is smooth so it is upsampled bilinearly.
const FLOW_STEP: usize = 4;
const FLOW_PERIOD: f64 = 56.0;
const TURBULENCE_PX: f64 = 14.0;

fn synth_dyncon(spec: &SynthSpec) -> Vec<Frame> {
    let tex = GradientNoise::new(spec.seed);
    let flow_x = GradientNoise::new(spec.seed.wrapping_add(0x1000));
    let flow_y = GradientNoise::new(spec.seed.wrapping_add(0x2000));
    let f = spec.detail_scale / BASE_PERIOD;
    let a = spec.motion_amplitude;
    let turb = TURBULENCE_PX * spec.advect_turbulence;
    // Time rate of the displacement noise so local speeds are on the order of `a`.
    let flow_rate = if turb > 0.0 { a / (1.5 * turb) } else { 0.0 };
    // Evolution of the texture itself, independent of transport.
    let evolve = 0.045 * a;
    let (gw, gh) = (spec.width / FLOW_STEP + 2, spec.height / FLOW_STEP + 2);

    (0..spec.n_frames)
        .into_par_iter()
        .map(|t| {
            let tf = t as f64;
            let zf = tf * flow_rate;
            let grid: Vec<(f64, f64)> = (0..gw * gh)
                .map(|i| {
                    let (gx, gy) = ((i % gw * FLOW_STEP) as f64, (i / gw * FLOW_STEP) as f64);
                    (
                        turb * flow_x.fbm3(gx / FLOW_PERIOD, gy / FLOW_PERIOD, zf, 2),
                        turb * flow_y.fbm3(gx / FLOW_PERIOD, gy / FLOW_PERIOD, zf, 2),
                    )
                })
                .collect();
            let luma = Plane::from_fn(spec.width, spec.height, |x, y| {
                let (gx, gy) = (x / FLOW_STEP, y / FLOW_STEP);
                let (fx, fy) = (
                    (x % FLOW_STEP) as f64 / FLOW_STEP as f64,
                    (y % FLOW_STEP) as f64 / FLOW_STEP as f64,
                );
                let at = |i: usize, j: usize| grid[j * gw + i];
                let lerp2 = |a: (f64, f64), b: (f64, f64), t: f64| {
                    (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
                };
                let top = lerp2(at(gx, gy), at(gx + 1, gy), fx);
                let bottom = lerp2(at(gx, gy + 1), at(gx + 1, gy + 1), fx);
                let (dx, dy) = lerp2(top, bottom, fy);
                to_gray(tex.fbm3(
                    (x as f64 + dx) * f,
                    (y as f64 + dy) * f,
                    tf * evolve * f,
                    OCTAVES,
                ))
            });
            frame_from_luma(luma)
        })
        .collect()
}

/// Renders one labelled clip named `{class}_{seed:016x}`.
pub fn synth_clip(spec: &SynthSpec) -> Result<Clip, SynthError> {
    spec.validate()?;
    let frames = match spec.class {
        TextureClass::Static => synth_static(spec),
        TextureClass::Dyndis => synth_dyndis(spec),
        TextureClass::Dyncon => synth_dyncon(spec),
    };
    let clip = Clip::new(
        format!("{}_{:016x}", spec.class, spec.seed),
        frames,
        spec.fps,
    )
    .map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    Ok(clip.with_label(Some(spec.class)))
}

/// Relative jitter applied per clip by [`synth_corpus`].
pub const AMPLITUDE_JITTER: (f64, f64) = (0.75, 1.25);
pub const DETAIL_JITTER: (f64, f64) = (0.8, 1.25);

/// SplitMix64 finalizer, used to derive independent per-clip seeds.
pub fn mix_seed(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn clip_seed(seed: u64, class: TextureClass, index: usize) -> u64 {
    mix_seed(mix_seed(mix_seed(seed) ^ class.index() as u64) ^ index as u64)
}

/// Per-clip specs of a corpus: `per_class` clips of each class, in class order.
pub fn corpus_specs(
    per_class: usize,
    base: &SynthSpec,
    seed: u64,
) -> Result<Vec<SynthSpec>, SynthError> {
    if per_class == 0 {
        return Err(SynthError::InvalidSpec("per_class must be >= 1".into()));
    }
    let mut specs = Vec::with_capacity(3 * per_class);
    for class in TextureClass::ALL {
        for index in 0..per_class {
            let clip_seed = clip_seed(seed, class, index);
            let mut rng = ChaCha8Rng::seed_from_u64(clip_seed);
            let spec = SynthSpec {
                class,
                motion_amplitude: base.motion_amplitude
                    * rng.gen_range(AMPLITUDE_JITTER.0..AMPLITUDE_JITTER.1),
                detail_scale: base.detail_scale * rng.gen_range(DETAIL_JITTER.0..DETAIL_JITTER.1),
                seed: clip_seed,
                ..base.clone()
            };
            spec.validate()?;
            specs.push(spec);
        }
    }
    Ok(specs)
}

/// Generates `3 * per_class` labelled clips named `{class}_{index:03}`.
pub fn synth_corpus(
    per_class: usize,
    base: &SynthSpec,
    seed: u64,
) -> Result<Vec<Clip>, SynthError> {
    let specs = corpus_specs(per_class, base, seed)?;
    specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let clip = synth_clip(spec)?;
            Ok(clip.with_name(format!("{}_{:03}", spec.class, i % per_class)))
        })
        .collect()
}
