//! Seeded gradient noise.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Classic permutation-table gradient noise in 2 and 3 dimensions, range roughly [-1, 1].
#[derive(Clone)]
pub struct GradientNoise {
    perm: [u8; 512],
}

const GRAD3: [(f64, f64, f64); 12] = [
    (1.0, 1.0, 0.0),
    (-1.0, 1.0, 0.0),
    (1.0, -1.0, 0.0),
    (-1.0, -1.0, 0.0),
    (1.0, 0.0, 1.0),
    (-1.0, 0.0, 1.0),
    (1.0, 0.0, -1.0),
    (-1.0, 0.0, -1.0),
    (0.0, 1.0, 1.0),
    (0.0, -1.0, 1.0),
    (0.0, 1.0, -1.0),
    (0.0, -1.0, -1.0),
];

const GAIN: f64 = 0.6;

#[inline]
fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

impl GradientNoise {
    pub fn new(seed: u64) -> Self {
        let mut table: Vec<u8> = (0..=255).collect();
        table.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut perm = [0u8; 512];
        for i in 0..512 {
            perm[i] = table[i & 255];
        }
        Self { perm }
    }

    #[inline]
    fn hash2(&self, x: i64, y: i64) -> usize {
        let xi = (x & 255) as usize;
        let yi = (y & 255) as usize;
        self.perm[self.perm[xi] as usize + yi] as usize
    }

    #[inline]
    fn hash3(&self, x: i64, y: i64, z: i64) -> usize {
        let h = self.hash2(x, y);
        self.perm[h + (z & 255) as usize] as usize
    }

    pub fn noise2(&self, x: f64, y: f64) -> f64 {
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (ix, iy) = (x0 as i64, y0 as i64);
        let g = |i: i64, j: i64, dx: f64, dy: f64| {
            let (gx, gy, _) = GRAD3[self.hash2(i, j) % 8];
            gx * dx + gy * dy
        };
        let n00 = g(ix, iy, fx, fy);
        let n10 = g(ix + 1, iy, fx - 1.0, fy);
        let n01 = g(ix, iy + 1, fx, fy - 1.0);
        let n11 = g(ix + 1, iy + 1, fx - 1.0, fy - 1.0);
        let (u, v) = (fade(fx), fade(fy));
        lerp(lerp(n00, n10, u), lerp(n01, n11, u), v)
    }

    pub fn noise3(&self, x: f64, y: f64, z: f64) -> f64 {
        let (x0, y0, z0) = (x.floor(), y.floor(), z.floor());
        let (fx, fy, fz) = (x - x0, y - y0, z - z0);
        let (ix, iy, iz) = (x0 as i64, y0 as i64, z0 as i64);
        let g = |i: i64, j: i64, k: i64, dx: f64, dy: f64, dz: f64| {
            let (gx, gy, gz) = GRAD3[self.hash3(i, j, k) % 12];
            gx * dx + gy * dy + gz * dz
        };
        let (u, v, w) = (fade(fx), fade(fy), fade(fz));
        let x00 = lerp(
            g(ix, iy, iz, fx, fy, fz),
            g(ix + 1, iy, iz, fx - 1.0, fy, fz),
            u,
        );
        let x10 = lerp(
            g(ix, iy + 1, iz, fx, fy - 1.0, fz),
            g(ix + 1, iy + 1, iz, fx - 1.0, fy - 1.0, fz),
            u,
        );
        let x01 = lerp(
            g(ix, iy, iz + 1, fx, fy, fz - 1.0),
            g(ix + 1, iy, iz + 1, fx - 1.0, fy, fz - 1.0),
            u,
        );
        let x11 = lerp(
            g(ix, iy + 1, iz + 1, fx, fy - 1.0, fz - 1.0),
            g(ix + 1, iy + 1, iz + 1, fx - 1.0, fy - 1.0, fz - 1.0),
            u,
        );
        lerp(lerp(x00, x10, v), lerp(x01, x11, v), w)
    }

    /// Fractal sum of `octaves` 2D octaves (lacunarity 2, gain 0.6), normalized to about [-1, 1].
    pub fn fbm2(&self, x: f64, y: f64, octaves: u32) -> f64 {
        let (mut sum, mut amp, mut freq, mut norm) = (0.0, 1.0, 1.0, 0.0);
        for o in 0..octaves {
            // Offset octaves so they do not share lattice points.
            let off = o as f64 * 17.31;
            sum += amp * self.noise2(x * freq + off, y * freq - off);
            norm += amp;
            amp *= GAIN;
            freq *= 2.0;
        }
        sum / norm
    }

    pub fn fbm3(&self, x: f64, y: f64, z: f64, octaves: u32) -> f64 {
        let (mut sum, mut amp, mut freq, mut norm) = (0.0, 1.0, 1.0, 0.0);
        for o in 0..octaves {
            let off = o as f64 * 17.31;
            sum += amp * self.noise3(x * freq + off, y * freq - off, z * freq + off);
            norm += amp;
            amp *= GAIN;
            freq *= 2.0;
        }
        sum / norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_lattice_points() {
        let n = GradientNoise::new(3);
        for i in -3..3 {
            assert_eq!(n.noise2(i as f64, 2.0), 0.0);
            assert_eq!(n.noise3(1.0, i as f64, 4.0), 0.0);
        }
    }

    #[test]
    fn bounded_and_seeded() {
        let a = GradientNoise::new(1);
        let b = GradientNoise::new(1);
        let c = GradientNoise::new(2);
        let mut differs = false;
        for i in 0..500 {
            let (x, y) = (i as f64 * 0.137, i as f64 * 0.071);
            let v = a.fbm3(x, y, 0.3, 4);
            assert!(v.abs() <= 1.5);
            assert_eq!(v, b.fbm3(x, y, 0.3, 4));
            differs |= v != c.fbm3(x, y, 0.3, 4);
        }
        assert!(differs);
    }
}
