use std::io::{self, Write};

use super::{check_geometry, InterpError, InterpParams};
use crate::media::{Frame, Plane};

/// Integer-pel displacement in luma samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    pub fn new(dx: i32, dy: i32) -> Self {
        Self { dx, dy }
    }

    #[inline]
    pub fn l1(self) -> u32 {
        self.dx.unsigned_abs() + self.dy.unsigned_abs()
    }

    pub fn magnitude(self) -> f64 {
        (self.dx as f64).hypot(self.dy as f64)
    }
}

/// Per-block vectors from an anchor frame to a reference frame.
///
/// Block `(bx, by)` covers anchor samples starting at `(bx * block_size, by * block_size)`;
/// edge blocks are clipped to the frame.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionField {
    block_size: usize,
    grid_w: usize,
    grid_h: usize,
    width: usize,
    height: usize,
    vectors: Vec<MotionVector>,
    sad: Vec<u32>,
}

impl MotionField {
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn grid_w(&self) -> usize {
        self.grid_w
    }

    pub fn grid_h(&self) -> usize {
        self.grid_h
    }

    pub fn vectors(&self) -> &[MotionVector] {
        &self.vectors
    }

    pub fn get(&self, bx: usize, by: usize) -> MotionVector {
        self.vectors[by * self.grid_w + bx]
    }

    /// SAD of the chosen match for a block.
    pub fn sad(&self, bx: usize, by: usize) -> u32 {
        self.sad[by * self.grid_w + bx]
    }

    /// Anchor-frame rectangle `(x, y, w, h)` covered by a block.
    pub fn block_rect(&self, bx: usize, by: usize) -> (usize, usize, usize, usize) {
        let x = bx * self.block_size;
        let y = by * self.block_size;
        (
            x,
            y,
            self.block_size.min(self.width - x),
            self.block_size.min(self.height - y),
        )
    }

    pub fn mean_magnitude(&self) -> f64 {
        self.vectors.iter().map(|v| v.magnitude()).sum::<f64>() / self.vectors.len() as f64
    }

    /// Debug sidecar: a `grid_w grid_h block_size` header, then `bx by dx dy` per block.
    pub fn write_sidecar<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# grid_w grid_h block_size")?;
        writeln!(out, "{} {} {}", self.grid_w, self.grid_h, self.block_size)?;
        for by in 0..self.grid_h {
            for bx in 0..self.grid_w {
                let v = self.get(bx, by);
                writeln!(out, "{bx} {by} {} {}", v.dx, v.dy)?;
            }
        }
        Ok(())
    }
}

/// Block matching from `prev` to `next` on the luma plane.
///
/// Each block picks the vector minimizing
/// `SAD + smoothness_lambda * |v - median(left, top, top-right)|_1`
/// over the integer window `[-search_range, search_range]^2`. Reference samples
/// outside the frame are edge-replicated. Ties go to the smallest `|v|_1`, then
/// the smallest `dy`, then the smallest `dx`. Blocks are visited in raster order
/// and undecided neighbours count as the zero vector. The interpolation mode is
/// ignored.
pub fn estimate_motion(
    prev: &Frame,
    next: &Frame,
    params: &InterpParams,
) -> Result<MotionField, InterpError> {
    check_geometry(prev, next)?;
    params.validate()?;
    Ok(block_match(
        prev.luma(),
        next.luma(),
        params.block_size,
        params.search_range,
        params.smoothness_lambda,
    ))
}

fn median3(a: i32, b: i32, c: i32) -> i32 {
    a.max(b).min(a.min(b).max(c))
}

struct Best {
    cost: f64,
    l1: u32,
    v: MotionVector,
    sad: u32,
}

impl Best {
    #[inline]
    fn beaten_by(&self, cost: f64, v: MotionVector) -> bool {
        if cost != self.cost {
            return cost < self.cost;
        }
        (v.l1(), v.dy, v.dx) < (self.l1, self.v.dy, self.v.dx)
    }
}

fn block_match(
    anchor: &Plane,
    reference: &Plane,
    block_size: usize,
    range: usize,
    lambda: f64,
) -> MotionField {
    let (width, height) = (anchor.width(), anchor.height());
    let grid_w = width.div_ceil(block_size);
    let grid_h = height.div_ceil(block_size);
    let padded = reference.padded(range);
    let r = range as i32;

    let mut vectors = Vec::with_capacity(grid_w * grid_h);
    let mut sads = Vec::with_capacity(grid_w * grid_h);

    for by in 0..grid_h {
        for bx in 0..grid_w {
            let x0 = bx * block_size;
            let y0 = by * block_size;
            let bw = block_size.min(width - x0);
            let bh = block_size.min(height - y0);

            let at = |gx: usize, gy: usize| vectors[gy * grid_w + gx];
            let left = if bx > 0 {
                at(bx - 1, by)
            } else {
                MotionVector::ZERO
            };
            let top = if by > 0 {
                at(bx, by - 1)
            } else {
                MotionVector::ZERO
            };
            let top_right = if by > 0 && bx + 1 < grid_w {
                at(bx + 1, by - 1)
            } else {
                MotionVector::ZERO
            };
            let pred = MotionVector::new(
                median3(left.dx, top.dx, top_right.dx),
                median3(left.dy, top.dy, top_right.dy),
            );

            let sad_at = |v: MotionVector, bound: f64| -> Option<u32> {
                let mut sad = 0u32;
                for row in 0..bh {
                    let a = &anchor.row(y0 + row)[x0..x0 + bw];
                    let b = padded.row_at(
                        x0 as isize + v.dx as isize,
                        (y0 + row) as isize + v.dy as isize,
                        bw,
                    );
                    sad += a
                        .iter()
                        .zip(b)
                        .map(|(&p, &q)| p.abs_diff(q) as u32)
                        .sum::<u32>();
                    if sad as f64 > bound {
                        return None;
                    }
                }
                Some(sad)
            };
            let penalty = |v: MotionVector| {
                lambda * ((v.dx - pred.dx).unsigned_abs() + (v.dy - pred.dy).unsigned_abs()) as f64
            };

            // Seed with the zero vector; visiting order does not affect the result
            // because every comparison uses the full tie-break key.
            let zero_sad = sad_at(MotionVector::ZERO, f64::INFINITY).unwrap();
            let mut best = Best {
                cost: zero_sad as f64 + penalty(MotionVector::ZERO),
                l1: 0,
                v: MotionVector::ZERO,
                sad: zero_sad,
            };
            let consider = |v: MotionVector, best: &mut Best| {
                let pen = penalty(v);
                if pen > best.cost {
                    return;
                }
                // Equal cost can still win on the tie-break, so prune only on strictly greater.
                if let Some(sad) = sad_at(v, best.cost - pen) {
                    let cost = sad as f64 + pen;
                    if best.beaten_by(cost, v) {
                        *best = Best {
                            cost,
                            l1: v.l1(),
                            v,
                            sad,
                        };
                    }
                }
            };
            if pred.dx.abs() <= r && pred.dy.abs() <= r && pred != MotionVector::ZERO {
                consider(pred, &mut best);
            }
            for dy in -r..=r {
                for dx in -r..=r {
                    let v = MotionVector::new(dx, dy);
                    if v != MotionVector::ZERO && v != pred {
                        consider(v, &mut best);
                    }
                }
            }
            vectors.push(best.v);
            sads.push(best.sad);
        }
    }

    MotionField {
        block_size,
        grid_w,
        grid_h,
        width,
        height,
        vectors,
        sad: sads,
    }
}
