use std::borrow::Borrow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TafiError;
use crate::media::{Clip, Frame, Plane};

/// Three co-located patches from consecutive frames `t - 1`, `t`, `t + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Triplet {
    pub prev: Frame,
    pub mid: Frame,
    pub next: Frame,
    pub clip_id: String,
    pub t: usize,
    /// Top-left corner of the patch in the source frames.
    pub origin: (usize, usize),
}

impl Triplet {
    pub fn patch_size(&self) -> (usize, usize) {
        (self.mid.width(), self.mid.height())
    }

    fn map(&self, f: impl Fn(&Frame) -> Frame) -> Triplet {
        Triplet {
            prev: f(&self.prev),
            mid: f(&self.mid),
            next: f(&self.next),
            ..self.clone()
        }
    }
}

/// Draws `n` square `patch`-sized triplets.
///
/// Each draw picks a clip uniformly, then `t` uniformly in `[1, len - 2]`,
/// then an even-aligned origin uniformly over the valid positions.
pub fn sample_triplets<C: Borrow<Clip>>(
    clips: &[C],
    n: usize,
    patch: usize,
    seed: u64,
) -> Result<Vec<Triplet>, TafiError> {
    if clips.is_empty() {
        return Err(TafiError::EmptyClipList);
    }
    if patch == 0 || !patch.is_multiple_of(2) {
        return Err(TafiError::InvalidSpec(format!(
            "patch size {patch} must be even and nonzero"
        )));
    }
    for clip in clips {
        let clip = clip.borrow();
        if clip.len() < 3 {
            return Err(TafiError::ClipTooShort {
                clip_id: clip.name().to_string(),
                frames: clip.len(),
            });
        }
        if clip.width() < patch || clip.height() < patch {
            return Err(TafiError::PatchTooLarge {
                patch,
                width: clip.width(),
                height: clip.height(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let clip = clips[rng.gen_range(0..clips.len())].borrow();
        let t = rng.gen_range(1..=clip.len() - 2);
        let x = 2 * rng.gen_range(0..=(clip.width() - patch) / 2);
        let y = 2 * rng.gen_range(0..=(clip.height() - patch) / 2);
        let cut = |i: usize| clip.frame(i).extract_patch(x, y, patch, patch);
        out.push(Triplet {
            prev: cut(t - 1)?,
            mid: cut(t)?,
            next: cut(t + 1)?,
            clip_id: clip.name().to_string(),
            t,
            origin: (x, y),
        });
    }
    Ok(out)
}

/// One random draw of the training-time augmentation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Augmentation {
    pub hflip: bool,
    pub vflip: bool,
    /// Swap `prev` and `next`.
    pub reverse: bool,
    /// Luma gain, drawn from `[0.9, 1.1]`.
    pub gain: f64,
    /// Luma offset in gray levels, drawn from `[-10, 10]`.
    pub offset: f64,
}

impl Augmentation {
    pub const IDENTITY: Augmentation = Augmentation {
        hflip: false,
        vflip: false,
        reverse: false,
        gain: 1.0,
        offset: 0.0,
    };

    pub fn draw(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            hflip: rng.gen_bool(0.5),
            vflip: rng.gen_bool(0.5),
            reverse: rng.gen_bool(0.5),
            gain: rng.gen_range(0.9..=1.1),
            offset: rng.gen_range(-10.0..=10.0),
        }
    }

    pub fn apply(&self, triplet: &Triplet) -> Triplet {
        let mut out = triplet.map(|frame| {
            let mut f = frame.clone();
            if self.hflip {
                f = f.map_planes(Plane::flip_horizontal);
            }
            if self.vflip {
                f = f.map_planes(Plane::flip_vertical);
            }
            if self.gain != 1.0 || self.offset != 0.0 {
                let luma = f.luma().map(|v| {
                    (v as f64 * self.gain + self.offset)
                        .round()
                        .clamp(0.0, 255.0) as u8
                });
                f = f.with_luma(luma).expect("jitter preserves geometry");
            }
            f
        });
        if self.reverse {
            std::mem::swap(&mut out.prev, &mut out.next);
        }
        out
    }
}

/// Applies [`Augmentation::draw`]`(seed)` to `triplet`.
pub fn augment(triplet: &Triplet, seed: u64) -> Triplet {
    Augmentation::draw(seed).apply(triplet)
}
