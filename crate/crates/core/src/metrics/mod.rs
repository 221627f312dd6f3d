//! Full-reference quality metrics computed on the luma plane.

mod ssim;
mod vmaf;

pub use ssim::ssim;
pub use vmaf::{vmaf_external, VmafConfig, VmafError, VmafScore};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::Frame;

/// PSNR reported for identical frames, so aggregates stay finite.
pub const PSNR_CAP_DB: f64 = 100.0;
const PEAK: f64 = 255.0;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("frame geometry mismatch: {0}x{1} vs {2}x{3}")]
    GeometryMismatch(usize, usize, usize, usize),
    #[error("frame {0}x{1} is smaller than the 11x11 SSIM window")]
    FrameTooSmall(usize, usize),
}

pub(crate) fn check_geometry(a: &Frame, b: &Frame) -> Result<(), MetricError> {
    if a.same_geometry(b) {
        Ok(())
    } else {
        Err(MetricError::GeometryMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Psnr {
    pub db: f64,
    /// Set when the frames were identical and `db` is [`PSNR_CAP_DB`].
    pub capped: bool,
}

/// Scores of one interpolated frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub clip_id: String,
    pub frame_index: usize,
    pub psnr: f64,
    pub ssim: f64,
    pub capped: bool,
}

pub fn psnr(reference: &Frame, test: &Frame) -> Result<Psnr, MetricError> {
    check_geometry(reference, test)?;
    let a = reference.luma().data();
    let b = test.luma().data();
    let sse: u64 = a
        .iter()
        .zip(b)
        .map(|(&p, &q)| {
            let d = p.abs_diff(q) as u64;
            d * d
        })
        .sum();
    if sse == 0 {
        return Ok(Psnr {
            db: PSNR_CAP_DB,
            capped: true,
        });
    }
    let mse = sse as f64 / a.len() as f64;
    Ok(Psnr {
        db: (10.0 * (PEAK * PEAK / mse).log10()).min(PSNR_CAP_DB),
        capped: false,
    })
}

/// Mean absolute luma difference, the tuning loss.
pub fn mean_abs_error(reference: &Frame, test: &Frame) -> Result<f64, MetricError> {
    check_geometry(reference, test)?;
    let a = reference.luma().data();
    let b = test.luma().data();
    let sum: u64 = a.iter().zip(b).map(|(&p, &q)| p.abs_diff(q) as u64).sum();
    Ok(sum as f64 / a.len() as f64)
}

/// Scores one interpolated frame against its ground truth.
pub fn score_frame(
    clip_id: &str,
    frame_index: usize,
    reference: &Frame,
    test: &Frame,
) -> Result<MetricRecord, MetricError> {
    let p = psnr(reference, test)?;
    let s = ssim(reference, test)?;
    Ok(MetricRecord {
        clip_id: clip_id.to_string(),
        frame_index,
        psnr: p.db,
        ssim: s,
        capped: p.capped,
    })
}
