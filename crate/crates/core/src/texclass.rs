//! Texture class taxonomy, clip features, and the routing decision rule.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::{estimate_motion, InterpError, InterpParams, MotionVector};
use crate::media::{Clip, Plane};

/// The three homogeneous video texture classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextureClass {
    /// Rigid texture under global (camera) motion.
    Static,
    /// Discernible parts moving independently.
    Dyndis,
    /// Irregular texture moving as a continuum (water, smoke, fire).
    Dyncon,
}

impl TextureClass {
    pub const ALL: [TextureClass; 3] = [Self::Static, Self::Dyndis, Self::Dyncon];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Static => "static",
            Self::Dyndis => "dyndis",
            Self::Dyncon => "dyncon",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for TextureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TextureClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(Self::Static),
            "dyndis" => Ok(Self::Dyndis),
            "dyncon" => Ok(Self::Dyncon),
            other => Err(format!("unknown texture class `{other}`")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TexClassError {
    #[error("clip has {0} frames, feature extraction needs at least 3")]
    ClipTooShort(usize),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

/// Spatiotemporal clip descriptors used for routing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextureFeatures {
    /// Mean absolute luma residual after the best global integer translation (gray levels).
    pub gmc_residual: f64,
    /// Within-cluster over total variance of block vectors under a 2-cluster split, in [0, 1].
    pub flow_incoherence: f64,
    /// Mean block vector magnitude (pixels/frame).
    pub mean_motion: f64,
    /// Mean luma gradient magnitude (gray levels/pixel).
    pub spatial_detail: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierThresholds {
    pub static_residual_max: f64,
    pub incoherence_split: f64,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        Self {
            static_residual_max: 2.0,
            incoherence_split: 0.6,
        }
    }
}

const MAX_PAIRS: usize = 16;
const KMEANS_ITERS: usize = 10;

/// Averages per-pair features over at most 16 evenly strided consecutive frame pairs.
pub fn extract_features(
    clip: &Clip,
    params: &InterpParams,
) -> Result<TextureFeatures, TexClassError> {
    if clip.len() < 3 {
        return Err(TexClassError::ClipTooShort(clip.len()));
    }
    params.validate()?;
    let pairs = clip.len() - 1;
    let stride = pairs.div_ceil(MAX_PAIRS);
    let starts: Vec<usize> = (0..pairs).step_by(stride).collect();

    let mut sum = [0.0f64; 4];
    for &t in &starts {
        let a = clip.frame(t);
        let b = clip.frame(t + 1);
        let field = estimate_motion(a, b, params)?;
        sum[0] += global_residual(a.luma(), b.luma(), params.search_range);
        sum[1] += two_cluster_incoherence(field.vectors());
        sum[2] += field.mean_magnitude();
        sum[3] += spatial_detail(a.luma());
    }
    let n = starts.len() as f64;
    Ok(TextureFeatures {
        gmc_residual: sum[0] / n,
        flow_incoherence: (sum[1] / n).clamp(0.0, 1.0),
        mean_motion: sum[2] / n,
        spatial_detail: sum[3] / n,
    })
}

/// Two-threshold decision tree; boundary values take the earlier branch.
pub fn classify(features: &TextureFeatures, thresholds: &ClassifierThresholds) -> TextureClass {
    if features.gmc_residual <= thresholds.static_residual_max {
        TextureClass::Static
    } else if features.flow_incoherence <= thresholds.incoherence_split {
        TextureClass::Dyndis
    } else {
        TextureClass::Dyncon
    }
}

/// Best integer shift `d` (so that `b(x + d) ~ a(x)`) by mean absolute difference over the
/// overlapping region, with the same tie-break as block matching. Returns `(d, residual)`.
pub fn global_translation(a: &Plane, b: &Plane, range: usize) -> (MotionVector, f64) {
    let (w, h) = (a.width() as i32, a.height() as i32);
    let r = (range as i32).min(w - 1).min(h - 1);
    let mut best = (f64::INFINITY, MotionVector::ZERO);
    for dy in -r..=r {
        for dx in -r..=r {
            let x0 = 0.max(-dx);
            let x1 = w.min(w - dx);
            let y0 = 0.max(-dy);
            let y1 = h.min(h - dy);
            let mut sad = 0u64;
            for y in y0..y1 {
                let ra = &a.row(y as usize)[x0 as usize..x1 as usize];
                let rb = &b.row((y + dy) as usize)[(x0 + dx) as usize..(x1 + dx) as usize];
                sad += ra
                    .iter()
                    .zip(rb)
                    .map(|(&p, &q)| p.abs_diff(q) as u64)
                    .sum::<u64>();
            }
            let mad = sad as f64 / ((x1 - x0) as f64 * (y1 - y0) as f64);
            let v = MotionVector::new(dx, dy);
            let better = mad < best.0
                || (mad == best.0 && (v.l1(), v.dy, v.dx) < (best.1.l1(), best.1.dy, best.1.dx));
            if better {
                best = (mad, v);
            }
        }
    }
    (best.1, best.0)
}

/// Quarter-pel refinement steps tried on each axis around the integer optimum.
const SUBPEL_STEPS: [f64; 7] = [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75];

/// Residual after the best global translation at quarter-pel precision: the integer
/// optimum of [`global_translation`] refined with bilinearly resampled shifts.
pub fn global_residual(a: &Plane, b: &Plane, range: usize) -> f64 {
    let (d, integer_mad) = global_translation(a, b, range);
    let mut best = integer_mad;
    for &fy in &SUBPEL_STEPS {
        for &fx in &SUBPEL_STEPS {
            if fx == 0.0 && fy == 0.0 {
                continue;
            }
            if let Some(mad) = shifted_mad(a, b, d.dx as f64 + fx, d.dy as f64 + fy) {
                best = best.min(mad);
            }
        }
    }
    best
}

/// Mean absolute difference between `a(x)` and bilinearly sampled `b(x + s)` over the
/// region where every tap is inside `b`.
fn shifted_mad(a: &Plane, b: &Plane, sx: f64, sy: f64) -> Option<f64> {
    let (w, h) = (a.width() as i64, a.height() as i64);
    let (ix, iy) = (sx.floor() as i64, sy.floor() as i64);
    let (fx, fy) = (sx - ix as f64, sy - iy as f64);
    let x0 = 0.max(-ix);
    let x1 = w.min(w - ix - 1);
    let y0 = 0.max(-iy);
    let y1 = h.min(h - iy - 1);
    if x1 <= x0 || y1 <= y0 {
        return None;
    }
    let weights = [
        (1.0 - fx) * (1.0 - fy),
        fx * (1.0 - fy),
        (1.0 - fx) * fy,
        fx * fy,
    ];
    let mut sum = 0.0;
    for y in y0..y1 {
        let ra = a.row(y as usize);
        let top = b.row((y + iy) as usize);
        let bottom = b.row((y + iy + 1) as usize);
        for x in x0..x1 {
            let bx = (x + ix) as usize;
            let v = weights[0] * top[bx] as f64
                + weights[1] * top[bx + 1] as f64
                + weights[2] * bottom[bx] as f64
                + weights[3] * bottom[bx + 1] as f64;
            sum += (ra[x as usize] as f64 - v).abs();
        }
    }
    Some(sum / ((x1 - x0) * (y1 - y0)) as f64)
}

/// Ratio of within-cluster to total scatter of the vectors under a 2-means split.
///
/// Centroids start at the vector farthest from the mean and the vector farthest from
/// that one, then run a fixed number of refinement steps.
pub fn two_cluster_incoherence(vectors: &[MotionVector]) -> f64 {
    if vectors.len() < 2 {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = vectors.iter().map(|v| (v.dx as f64, v.dy as f64)).collect();
    let n = pts.len() as f64;
    let mean = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let d2 = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
    let total: f64 = pts.iter().map(|&p| d2(p, mean)).sum();
    if total < 1e-12 {
        return 0.0;
    }
    let farthest = |from: (f64, f64)| {
        pts.iter()
            .copied()
            .fold((from, -1.0), |acc, p| {
                let d = d2(p, from);
                if d > acc.1 {
                    (p, d)
                } else {
                    acc
                }
            })
            .0
    };
    let mut c = [farthest(mean), (0.0, 0.0)];
    c[1] = farthest(c[0]);

    let mut assign = vec![0usize; pts.len()];
    for _ in 0..KMEANS_ITERS {
        for (a, &p) in assign.iter_mut().zip(&pts) {
            *a = usize::from(d2(p, c[1]) < d2(p, c[0]));
        }
        for (k, centroid) in c.iter_mut().enumerate() {
            let members: Vec<_> = pts
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == k)
                .map(|(p, _)| *p)
                .collect();
            if !members.is_empty() {
                let m = members.len() as f64;
                *centroid = (
                    members.iter().map(|p| p.0).sum::<f64>() / m,
                    members.iter().map(|p| p.1).sum::<f64>() / m,
                );
            }
        }
    }
    let within: f64 = pts.iter().map(|&p| d2(p, c[0]).min(d2(p, c[1]))).sum();
    (within / total).clamp(0.0, 1.0)
}

/// Mean forward-difference gradient magnitude.
pub fn spatial_detail(plane: &Plane) -> f64 {
    let (w, h) = (plane.width(), plane.height());
    if w < 2 || h < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            let c = plane.get(x, y) as f64;
            let gx = plane.get(x + 1, y) as f64 - c;
            let gy = plane.get(x, y + 1) as f64 - c;
            sum += gx.hypot(gy);
        }
    }
    sum / ((w - 1) * (h - 1)) as f64
}
