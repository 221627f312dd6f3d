//! Texture-aware video frame interpolation (TAFI) benchmark toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`media`]: 8-bit 4:2:0 frames and clips, Y4M and raw planar I/O.
//! * [`texgen`]: deterministic synthetic texture clips for the three texture classes.
//! * [`texclass`]: spatiotemporal features and the texture class decision rule.
//! * [`interp`]: the parameterized block-matching frame interpolator.
//! * [`metrics`]: PSNR, SSIM and an external VMAF adapter.
//! * [`stats`]: one-way ANOVA and Welch's t-test with exact p-values.
//! * [`tafi`]: triplet sampling, augmentation, per-class profile tuning and routing.
//! * [`bench`]: the evaluation protocol, manifests, configuration and reports.

pub mod bench;
pub mod interp;
pub mod media;
pub mod metrics;
pub mod stats;
pub mod tafi;
pub mod texclass;
pub mod texgen;

pub use interp::{InterpParams, MotionField};
pub use media::{Clip, Frame, Plane};
pub use texclass::TextureClass;
