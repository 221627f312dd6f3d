//! Frame and clip containers plus container I/O.
//!
//! All pixel data is 8-bit planar 4:2:0. Frames and clips validate their
//! geometry on construction and are immutable afterwards.

mod raw;
mod y4m;

pub use raw::{read_raw, write_raw};
pub use y4m::{load_y4m, read_y4m, save_y4m, write_y4m};

use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::texclass::TextureClass;

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("malformed Y4M header: {0}")]
    MalformedHeader(String),
    #[error("frame {index} is truncated: expected {expected} bytes, got {got}")]
    TruncatedFrame {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("unsupported colorspace `{0}` (only 8-bit 4:2:0 is supported)")]
    UnsupportedColorspace(String),
    #[error("region {w}x{h}+{x}+{y} lies outside a {width}x{height} frame")]
    OutOfBounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        width: usize,
        height: usize,
    },
    #[error("geometry must be even and non-zero for 4:2:0, got {0}")]
    OddGeometry(String),
    #[error("plane size mismatch: {0}")]
    PlaneSize(String),
    #[error("frame geometry mismatch: {0}x{1} vs {2}x{3}")]
    GeometryMismatch(usize, usize, usize, usize),
    #[error("a clip needs at least one frame")]
    EmptyClip,
    #[error("invalid frame rate {0}:{1}")]
    InvalidFrameRate(u32, u32),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = MediaError> = std::result::Result<T, E>;

/// A single 8-bit sample plane stored row-major without padding.
#[derive(Clone, PartialEq, Eq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(MediaError::PlaneSize(format!(
                "{}x{} plane needs {} samples, got {}",
                width,
                height,
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds a plane by evaluating `f(x, y)` at every sample.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Sample with coordinates clamped to the plane (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Plane {
        let mut data = Vec::with_capacity(w * h);
        for row in y..y + h {
            data.extend_from_slice(&self.row(row)[x..x + w]);
        }
        Plane {
            width: w,
            height: h,
            data,
        }
    }

    pub fn map(&self, f: impl Fn(u8) -> u8) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn flip_horizontal(&self) -> Plane {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            data.extend(self.row(y).iter().rev());
        }
        Plane { data, ..*self }
    }

    pub fn flip_vertical(&self) -> Plane {
        let mut data = Vec::with_capacity(self.data.len());
        for y in (0..self.height).rev() {
            data.extend_from_slice(self.row(y));
        }
        Plane { data, ..*self }
    }

    /// Copy of the plane with a replicated border of `pad` samples on every side.
    pub(crate) fn padded(&self, pad: usize) -> PaddedPlane {
        let stride = self.width + 2 * pad;
        let rows = self.height + 2 * pad;
        let mut data = Vec::with_capacity(stride * rows);
        for py in 0..rows {
            let sy = (py as isize - pad as isize).clamp(0, self.height as isize - 1) as usize;
            let src = self.row(sy);
            data.extend(std::iter::repeat_n(src[0], pad));
            data.extend_from_slice(src);
            data.extend(std::iter::repeat_n(src[self.width - 1], pad));
        }
        PaddedPlane { pad, stride, data }
    }
}

impl fmt::Debug for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Plane({}x{})", self.width, self.height)
    }
}

/// Edge-replicated copy of a plane, addressed in the original coordinates.
pub(crate) struct PaddedPlane {
    pad: usize,
    stride: usize,
    data: Vec<u8>,
}

impl PaddedPlane {
    /// Row slice of `len` samples starting at original coordinate (x, y).
    /// Coordinates may lie up to `pad` samples outside the plane.
    #[inline]
    pub(crate) fn row_at(&self, x: isize, y: isize, len: usize) -> &[u8] {
        let px = (x + self.pad as isize) as usize;
        let py = (y + self.pad as isize) as usize;
        let start = py * self.stride + px;
        &self.data[start..start + len]
    }
}

/// One 8-bit 4:2:0 picture.
#[derive(Clone, PartialEq, Eq)]
pub struct Frame {
    luma: Plane,
    chroma_u: Plane,
    chroma_v: Plane,
}

impl Frame {
    pub const BIT_DEPTH: u32 = 8;

    pub fn new(luma: Plane, chroma_u: Plane, chroma_v: Plane) -> Result<Self> {
        check_even(luma.width, luma.height)?;
        let (cw, ch) = (luma.width / 2, luma.height / 2);
        for (name, plane) in [("U", &chroma_u), ("V", &chroma_v)] {
            if plane.width != cw || plane.height != ch {
                return Err(MediaError::PlaneSize(format!(
                    "{name} plane is {}x{}, expected {cw}x{ch}",
                    plane.width, plane.height
                )));
            }
        }
        Ok(Self {
            luma,
            chroma_u,
            chroma_v,
        })
    }

    /// Builds a frame from a luma plane with neutral (128) chroma.
    pub fn from_luma(luma: Plane) -> Result<Self> {
        check_even(luma.width, luma.height)?;
        let (cw, ch) = (luma.width / 2, luma.height / 2);
        Self::new(luma, Plane::filled(cw, ch, 128), Plane::filled(cw, ch, 128))
    }

    pub fn filled(width: usize, height: usize, y: u8, u: u8, v: u8) -> Result<Self> {
        check_even(width, height)?;
        Ok(Self {
            luma: Plane::filled(width, height, y),
            chroma_u: Plane::filled(width / 2, height / 2, u),
            chroma_v: Plane::filled(width / 2, height / 2, v),
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.luma.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.luma.height
    }

    #[inline]
    pub fn luma(&self) -> &Plane {
        &self.luma
    }

    #[inline]
    pub fn chroma_u(&self) -> &Plane {
        &self.chroma_u
    }

    #[inline]
    pub fn chroma_v(&self) -> &Plane {
        &self.chroma_v
    }

    pub fn planes(&self) -> [&Plane; 3] {
        [&self.luma, &self.chroma_u, &self.chroma_v]
    }

    /// Number of bytes of one frame payload.
    pub fn payload_len(width: usize, height: usize) -> usize {
        width * height + 2 * (width / 2) * (height / 2)
    }

    pub fn same_geometry(&self, other: &Frame) -> bool {
        self.width() == other.width() && self.height() == other.height()
    }

    pub fn check_geometry(&self, other: &Frame) -> Result<()> {
        if self.same_geometry(other) {
            Ok(())
        } else {
            Err(MediaError::GeometryMismatch(
                self.width(),
                self.height(),
                other.width(),
                other.height(),
            ))
        }
    }

    /// Crops a `w`x`h` region at (`x`, `y`); chroma is cropped at half coordinates.
    pub fn extract_patch(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Frame> {
        if !x.is_multiple_of(2) || !y.is_multiple_of(2) || !w.is_multiple_of(2) || !h.is_multiple_of(2) || w == 0 || h == 0 {
            return Err(MediaError::OddGeometry(format!("{w}x{h}+{x}+{y}")));
        }
        if x + w > self.width() || y + h > self.height() {
            return Err(MediaError::OutOfBounds {
                x,
                y,
                w,
                h,
                width: self.width(),
                height: self.height(),
            });
        }
        Ok(Frame {
            luma: self.luma.crop(x, y, w, h),
            chroma_u: self.chroma_u.crop(x / 2, y / 2, w / 2, h / 2),
            chroma_v: self.chroma_v.crop(x / 2, y / 2, w / 2, h / 2),
        })
    }

    /// Applies `f` to every plane.
    pub fn map_planes(&self, f: impl Fn(&Plane) -> Plane) -> Frame {
        Frame {
            luma: f(&self.luma),
            chroma_u: f(&self.chroma_u),
            chroma_v: f(&self.chroma_v),
        }
    }

    /// Replaces the luma plane, keeping chroma.
    pub fn with_luma(&self, luma: Plane) -> Result<Frame> {
        Frame::new(luma, self.chroma_u.clone(), self.chroma_v.clone())
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frame({}x{})", self.width(), self.height())
    }
}

fn check_even(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
        return Err(MediaError::OddGeometry(format!("{width}x{height}")));
    }
    Ok(())
}

/// Frame rate as a rational number of frames per second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(MediaError::InvalidFrameRate(num, den));
        }
        Ok(Self { num, den })
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for FrameRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.num, self.den)
    }
}

impl FromStr for FrameRate {
    type Err = MediaError;

    /// Parses `num:den`, `num/den` or a bare integer.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || MediaError::MalformedHeader(format!("bad frame rate `{s}`"));
        let (num, den) = match s.split_once([':', '/']) {
            Some((n, d)) => (
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            ),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        Self::new(num, den)
    }
}

/// An ordered sequence of equally sized frames.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clip {
    name: String,
    frames: Vec<Frame>,
    fps: FrameRate,
    label: Option<TextureClass>,
}

impl Clip {
    pub fn new(name: impl Into<String>, frames: Vec<Frame>, fps: FrameRate) -> Result<Self> {
        let first = frames.first().ok_or(MediaError::EmptyClip)?;
        for f in &frames[1..] {
            first.check_geometry(f)?;
        }
        // FrameRate fields are public; re-validate.
        let fps = FrameRate::new(fps.num, fps.den)?;
        Ok(Self {
            name: name.into(),
            frames,
            fps,
            label: None,
        })
    }

    pub fn with_label(mut self, label: Option<TextureClass>) -> Self {
        self.label = label;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> &Frame {
        &self.frames[index]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    /// Always false; a clip holds at least one frame.
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn fps(&self) -> FrameRate {
        self.fps
    }

    pub fn label(&self) -> Option<TextureClass> {
        self.label
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }
}
