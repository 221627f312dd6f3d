//! Parameterized block-matching frame interpolator.
//!
//! [`InterpParams`] plays the role of a trainable "model": the same
//! algorithm with different parameter sets behaves very differently on
//! rigid, part-wise and fluid motion, which is what per-texture tuning
//! exploits.

mod compensate;
mod motion;

pub use motion::{estimate_motion, MotionField, MotionVector};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::{Frame, Plane};

pub const BLOCK_SIZES: [usize; 3] = [8, 16, 32];
pub const MAX_SEARCH_RANGE: usize = 32;

#[derive(Debug, Error, PartialEq)]
pub enum InterpError {
    #[error("frame geometry mismatch: {0}x{1} vs {2}x{3}")]
    GeometryMismatch(usize, usize, usize, usize),
    #[error("invalid interpolator parameters: {0}")]
    InvalidParams(String),
}

/// Overlapped block motion compensation window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Obmc {
    Off,
    RaisedCosine,
}

/// How the two motion-compensated predictions are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Blend {
    Average,
    SadWeighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Motion-compensated interpolation.
    Mci,
    /// Per-sample mean of the two anchors; motion is ignored.
    FrameAverage,
}

macro_rules! str_enum {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    other => Err(format!("unknown {} `{other}`", stringify!($ty))),
                }
            }
        }
    };
}

str_enum!(Obmc { Off => "off", RaisedCosine => "raised_cosine" });
str_enum!(Blend { Average => "average", SadWeighted => "sad_weighted" });
str_enum!(Mode { Mci => "mci", FrameAverage => "frame_average" });

/// Interpolator configuration.
///
/// The [`Default`] value is the baseline, "off-the-shelf" configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpParams {
    pub block_size: usize,
    pub search_range: usize,
    /// Weight of the L1 deviation from the predicted vector, in SAD units per pixel of deviation.
    pub smoothness_lambda: f64,
    pub obmc: Obmc,
    pub blend: Blend,
    pub mode: Mode,
}

impl Default for InterpParams {
    fn default() -> Self {
        Self {
            block_size: 16,
            search_range: 8,
            smoothness_lambda: 16.0,
            obmc: Obmc::Off,
            blend: Blend::Average,
            mode: Mode::Mci,
        }
    }
}

impl InterpParams {
    pub fn validate(&self) -> Result<(), InterpError> {
        if !BLOCK_SIZES.contains(&self.block_size) {
            return Err(InterpError::InvalidParams(format!(
                "block_size {} not in {BLOCK_SIZES:?}",
                self.block_size
            )));
        }
        if self.search_range > MAX_SEARCH_RANGE {
            return Err(InterpError::InvalidParams(format!(
                "search_range {} exceeds {MAX_SEARCH_RANGE}",
                self.search_range
            )));
        }
        if !(self.smoothness_lambda.is_finite() && self.smoothness_lambda >= 0.0) {
            return Err(InterpError::InvalidParams(format!(
                "smoothness_lambda {} must be finite and >= 0",
                self.smoothness_lambda
            )));
        }
        Ok(())
    }

    /// Compact one-line description, e.g. `mci b16 s8 l16 obmc=off blend=average`.
    pub fn summary(&self) -> String {
        match self.mode {
            Mode::FrameAverage => "frame_average".to_string(),
            Mode::Mci => format!(
                "mci b{} s{} l{} obmc={} blend={}",
                self.block_size, self.search_range, self.smoothness_lambda, self.obmc, self.blend
            ),
        }
    }
}

pub(crate) fn check_geometry(a: &Frame, b: &Frame) -> Result<(), InterpError> {
    if a.same_geometry(b) {
        Ok(())
    } else {
        Err(InterpError::GeometryMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ))
    }
}

/// Synthesizes the frame halfway between `prev` and `next`.
pub fn interpolate(
    prev: &Frame,
    next: &Frame,
    params: &InterpParams,
) -> Result<Frame, InterpError> {
    check_geometry(prev, next)?;
    params.validate()?;
    match params.mode {
        Mode::FrameAverage => Ok(frame_average(prev, next)),
        Mode::Mci => {
            let forward = estimate_motion(prev, next, params)?;
            let backward = estimate_motion(next, prev, params)?;
            Ok(compensate::motion_compensate(
                prev, next, &forward, &backward, params,
            ))
        }
    }
}

/// Rounded per-sample mean of two frames with equal geometry.
pub fn frame_average(a: &Frame, b: &Frame) -> Frame {
    let avg = |p: &Plane, q: &Plane| {
        let data = p
            .data()
            .iter()
            .zip(q.data())
            .map(|(&x, &y)| ((x as u16 + y as u16 + 1) >> 1) as u8)
            .collect();
        Plane::new(p.width(), p.height(), data).expect("same geometry")
    };
    Frame::new(
        avg(a.luma(), b.luma()),
        avg(a.chroma_u(), b.chroma_u()),
        avg(a.chroma_v(), b.chroma_v()),
    )
    .expect("same geometry")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::psnr;

    pub(crate) fn textured(w: usize, h: usize, shift: isize) -> Frame {
        // Smooth but non-periodic texture so block matching has a unique optimum.
        let luma = Plane::from_fn(w, h, |x, y| {
            let xf = x as f64 - shift as f64;
            let yf = y as f64;
            let v = 128.0
                + 50.0 * (xf * 0.31 + yf * 0.17).sin()
                + 40.0 * (xf * 0.07 - yf * 0.23).cos()
                + 25.0 * ((xf * yf) * 0.003).sin();
            v.round().clamp(0.0, 255.0) as u8
        });
        Frame::from_luma(luma).unwrap()
    }

    fn all_params() -> Vec<InterpParams> {
        let mut out = Vec::new();
        for &block_size in &BLOCK_SIZES {
            for obmc in [Obmc::Off, Obmc::RaisedCosine] {
                for blend in [Blend::Average, Blend::SadWeighted] {
                    for mode in [Mode::Mci, Mode::FrameAverage] {
                        out.push(InterpParams {
                            block_size,
                            search_range: 4,
                            smoothness_lambda: 2.0,
                            obmc,
                            blend,
                            mode,
                        });
                    }
                }
            }
        }
        out
    }

    #[test]
    fn identity_for_every_params() {
        let f = textured(48, 40, 0);
        for p in all_params() {
            assert_eq!(interpolate(&f, &f, &p).unwrap(), f, "{}", p.summary());
        }
    }

    #[test]
    fn frame_average_arithmetic() {
        let a = Frame::filled(16, 16, 100, 100, 100).unwrap();
        let b = Frame::filled(16, 16, 200, 200, 200).unwrap();
        let p = InterpParams {
            mode: Mode::FrameAverage,
            ..Default::default()
        };
        assert_eq!(
            interpolate(&a, &b, &p).unwrap(),
            Frame::filled(16, 16, 150, 150, 150).unwrap()
        );
    }

    #[test]
    fn frame_average_symmetric() {
        let a = textured(32, 32, 0);
        let b = textured(32, 32, 5);
        let p = InterpParams {
            mode: Mode::FrameAverage,
            ..Default::default()
        };
        assert_eq!(
            interpolate(&a, &b, &p).unwrap(),
            interpolate(&b, &a, &p).unwrap()
        );
    }

    #[test]
    fn mci_beats_frame_average_on_translation() {
        let prev = textured(96, 96, 0);
        let mid = textured(96, 96, 2);
        let next = textured(96, 96, 4);
        let mci = InterpParams {
            search_range: 4,
            ..Default::default()
        };
        let avg = InterpParams {
            mode: Mode::FrameAverage,
            ..Default::default()
        };
        let p_mci = psnr(&mid, &interpolate(&prev, &next, &mci).unwrap()).unwrap();
        let p_avg = psnr(&mid, &interpolate(&prev, &next, &avg).unwrap()).unwrap();
        assert!(p_mci.db >= p_avg.db, "{} vs {}", p_mci.db, p_avg.db);
        assert!(p_mci.db > 40.0, "{}", p_mci.db);
    }

    #[test]
    fn geometry_mismatch() {
        let a = Frame::filled(16, 16, 0, 0, 0).unwrap();
        let b = Frame::filled(16, 18, 0, 0, 0).unwrap();
        assert!(matches!(
            interpolate(&a, &b, &InterpParams::default()),
            Err(InterpError::GeometryMismatch(..))
        ));
    }

    #[test]
    fn params_validation() {
        let bad = [
            InterpParams {
                block_size: 12,
                ..Default::default()
            },
            InterpParams {
                search_range: 33,
                ..Default::default()
            },
            InterpParams {
                smoothness_lambda: -1.0,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(p.validate().is_err());
        }
        assert!(InterpParams::default().validate().is_ok());
    }

    #[test]
    fn enum_names_round_trip() {
        for m in [Mode::Mci, Mode::FrameAverage] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert_eq!("raised_cosine".parse::<Obmc>().unwrap(), Obmc::RaisedCosine);
        assert!("bogus".parse::<Blend>().is_err());
    }
}
