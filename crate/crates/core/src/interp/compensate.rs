use super::{Blend, InterpParams, MotionField, MotionVector, Obmc};
use crate::media::{Frame, Plane};

/// Raised-cosine window of length `2 * block`; shifted copies at hop `block` sum to one.
fn raised_cosine(block: usize) -> Vec<f32> {
    let n = 2 * block;
    (0..n)
        .map(|i| {
            let s = (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).sin();
            (s * s) as f32
        })
        .collect()
}

struct Accumulator {
    width: usize,
    height: usize,
    sum: Vec<f32>,
    weight: Vec<f32>,
}

impl Accumulator {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            sum: vec![0.0; width * height],
            weight: vec![0.0; width * height],
        }
    }

    /// Rounds the weighted mean; samples never reached fall back to the frame average.
    fn resolve(self, a: &Plane, b: &Plane) -> Plane {
        let data = self
            .sum
            .iter()
            .zip(&self.weight)
            .zip(a.data().iter().zip(b.data()))
            .map(|((&s, &w), (&p, &q))| {
                if w > 1e-6 {
                    (s / w).round().clamp(0.0, 255.0) as u8
                } else {
                    ((p as u16 + q as u16 + 1) >> 1) as u8
                }
            })
            .collect();
        Plane::new(self.width, self.height, data).expect("accumulator geometry")
    }
}

/// Projects every block of `field` to the temporal midpoint.
///
/// For a block at anchor position `p` with vector `v`, midpoint sample `m` takes the
/// trajectory mean of `anchor[m - a]` and `reference[m + v - a]` with `a = floor(v / 2)`.
#[allow(clippy::too_many_arguments)]
fn project(
    acc: &mut Accumulator,
    anchor: &Plane,
    reference: &Plane,
    field: &MotionField,
    scale: usize,
    block_weights: &[f32],
    window: Option<&[f32]>,
) {
    let block = field.block_size() / scale;
    let half = (block / 2) as isize;
    let (w, h) = (acc.width as isize, acc.height as isize);

    for by in 0..field.grid_h() {
        for bx in 0..field.grid_w() {
            let v = field.get(bx, by);
            let v = if scale == 1 {
                v
            } else {
                MotionVector::new(v.dx / scale as i32, v.dy / scale as i32)
            };
            let (ax, ay) = (v.dx.div_euclid(2) as isize, v.dy.div_euclid(2) as isize);
            let (bxv, byv) = (v.dx as isize - ax, v.dy as isize - ay);
            let (lx, ly, lw, lh) = field.block_rect(bx, by);
            let (x0, y0) = ((lx / scale) as isize, (ly / scale) as isize);
            let bw = (lw / scale) as isize;
            let bh = (lh / scale) as isize;
            let bweight = block_weights[by * field.grid_w() + bx];

            // Anchor-side sample range and per-sample window weights.
            let (px0, py0, pw, ph) = match window {
                Some(_) => (x0 - half, y0 - half, 2 * block as isize, 2 * block as isize),
                None => (x0, y0, bw, bh),
            };
            for j in 0..ph {
                let py = py0 + j;
                let my = py + ay;
                if my < 0 || my >= h {
                    continue;
                }
                let wy = window.map_or(1.0, |win| win[j as usize]);
                for i in 0..pw {
                    let px = px0 + i;
                    let mx = px + ax;
                    if mx < 0 || mx >= w {
                        continue;
                    }
                    let wgt = bweight * wy * window.map_or(1.0, |win| win[i as usize]);
                    let s = anchor.get_clamped(px, py) as f32
                        + reference.get_clamped(mx + bxv, my + byv) as f32;
                    let idx = (my * w + mx) as usize;
                    acc.sum[idx] += wgt * 0.5 * s;
                    acc.weight[idx] += wgt;
                }
            }
        }
    }
}

fn block_weights(field: &MotionField, blend: Blend) -> Vec<f32> {
    let mut out = Vec::with_capacity(field.grid_w() * field.grid_h());
    for by in 0..field.grid_h() {
        for bx in 0..field.grid_w() {
            out.push(match blend {
                Blend::Average => 1.0,
                Blend::SadWeighted => {
                    let (_, _, w, h) = field.block_rect(bx, by);
                    let mad = field.sad(bx, by) as f32 / (w * h) as f32;
                    1.0 / (1.0 + mad)
                }
            });
        }
    }
    out
}

pub(super) fn motion_compensate(
    prev: &Frame,
    next: &Frame,
    forward: &MotionField,
    backward: &MotionField,
    params: &InterpParams,
) -> Frame {
    let fw = block_weights(forward, params.blend);
    let bw = block_weights(backward, params.blend);
    let plane = |a: &Plane, b: &Plane, scale: usize| {
        let window = match params.obmc {
            Obmc::Off => None,
            Obmc::RaisedCosine => Some(raised_cosine(params.block_size / scale)),
        };
        let mut acc = Accumulator::new(a.width(), a.height());
        project(&mut acc, a, b, forward, scale, &fw, window.as_deref());
        project(&mut acc, b, a, backward, scale, &bw, window.as_deref());
        acc.resolve(a, b)
    };
    Frame::new(
        plane(prev.luma(), next.luma(), 1),
        plane(prev.chroma_u(), next.chroma_u(), 2),
        plane(prev.chroma_v(), next.chroma_v(), 2),
    )
    .expect("same geometry")
}
