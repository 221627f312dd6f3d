use std::io::{Read, Write};

use super::y4m::{frame_from_bytes, read_full};
use super::{Clip, Frame, FrameRate, MediaError, Result};

/// Reads contiguous 8-bit 4:2:0 frames whose geometry is supplied externally.
pub fn read_raw<R: Read>(
    mut reader: R,
    width: usize,
    height: usize,
    fps: FrameRate,
) -> Result<Clip> {
    if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
        return Err(MediaError::OddGeometry(format!("{width}x{height}")));
    }
    let payload = Frame::payload_len(width, height);
    let mut frames = Vec::new();
    loop {
        let mut buf = vec![0u8; payload];
        let got = read_full(&mut reader, &mut buf)?;
        if got == 0 {
            break;
        }
        if got < payload {
            return Err(MediaError::TruncatedFrame {
                index: frames.len(),
                expected: payload,
                got,
            });
        }
        frames.push(frame_from_bytes(width, height, buf)?);
    }
    Clip::new("", frames, fps)
}

pub fn write_raw<W: Write>(clip: &Clip, mut writer: W) -> Result<()> {
    for frame in clip.frames() {
        for plane in frame.planes() {
            writer.write_all(plane.data())?;
        }
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_round_trip() {
        let bytes: Vec<u8> = (0..12u8).collect();
        let fps = FrameRate::new(25, 1).unwrap();
        let clip = read_raw(&bytes[..], 2, 2, fps).unwrap();
        assert_eq!(clip.len(), 2);
        let mut out = Vec::new();
        write_raw(&clip, &mut out).unwrap();
        assert_eq!(out, bytes);
    }

    #[test]
    fn raw_truncated() {
        let bytes = [0u8; 10];
        let fps = FrameRate::new(25, 1).unwrap();
        assert!(matches!(
            read_raw(&bytes[..], 2, 2, fps),
            Err(MediaError::TruncatedFrame { index: 1, .. })
        ));
    }
}
