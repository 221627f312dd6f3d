use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Clip, Frame, FrameRate, MediaError, Plane, Result};

const MAGIC: &str = "YUV4MPEG2";
const FRAME_TAG: &[u8] = b"FRAME";
// Longest header line accepted; guards against reading binary garbage forever.
const MAX_HEADER: usize = 1024;

/// Parses a YUV4MPEG2 stream. The returned clip has an empty name.
pub fn read_y4m<R: BufRead>(mut reader: R) -> Result<Clip> {
    let header = read_line(&mut reader)?
        .ok_or_else(|| MediaError::MalformedHeader("empty stream".into()))?;
    let header = String::from_utf8(header)
        .map_err(|_| MediaError::MalformedHeader("header is not ASCII".into()))?;
    let mut tokens = header.split(' ');
    if tokens.next() != Some(MAGIC) {
        return Err(MediaError::MalformedHeader(format!(
            "missing {MAGIC} signature"
        )));
    }

    let mut width = None;
    let mut height = None;
    let mut fps = None;
    for token in tokens.filter(|t| !t.is_empty()) {
        let (tag, value) = token.split_at(1);
        match tag {
            "W" => width = Some(parse_dim(value, "W")?),
            "H" => height = Some(parse_dim(value, "H")?),
            "F" => fps = Some(parse_ratio(value)?),
            "C" => check_colorspace(value)?,
            // Interlacing, aspect ratio and extensions carry nothing we store.
            "I" | "A" | "X" => {}
            _ => {
                return Err(MediaError::MalformedHeader(format!(
                    "unknown parameter `{token}`"
                )))
            }
        }
    }
    let width = width.ok_or_else(|| MediaError::MalformedHeader("missing W".into()))?;
    let height = height.ok_or_else(|| MediaError::MalformedHeader("missing H".into()))?;
    let fps = fps.ok_or_else(|| MediaError::MalformedHeader("missing F".into()))?;
    if width % 2 != 0 || height % 2 != 0 {
        return Err(MediaError::OddGeometry(format!("{width}x{height}")));
    }

    let payload = Frame::payload_len(width, height);
    let mut frames = Vec::new();
    while let Some(line) = read_line(&mut reader)? {
        if !line.starts_with(FRAME_TAG)
            || !(line.len() == FRAME_TAG.len() || line[FRAME_TAG.len()] == b' ')
        {
            return Err(MediaError::MalformedHeader(format!(
                "expected FRAME marker before frame {}",
                frames.len()
            )));
        }
        let mut buf = vec![0u8; payload];
        let got = read_full(&mut reader, &mut buf)?;
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

/// Serializes a clip; `read_y4m` of the output reproduces the clip exactly.
pub fn write_y4m<W: Write>(clip: &Clip, mut writer: W) -> Result<()> {
    let fps = clip.fps();
    writeln!(
        writer,
        "{MAGIC} W{} H{} F{}:{}",
        clip.width(),
        clip.height(),
        fps.num,
        fps.den
    )?;
    for frame in clip.frames() {
        writer.write_all(FRAME_TAG)?;
        writer.write_all(b"\n")?;
        for plane in frame.planes() {
            writer.write_all(plane.data())?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads a Y4M file; the clip is named after the file stem.
pub fn load_y4m(path: impl AsRef<Path>) -> Result<Clip> {
    let path = path.as_ref();
    let clip = read_y4m(BufReader::new(File::open(path)?))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(clip.with_name(name))
}

pub fn save_y4m(clip: &Clip, path: impl AsRef<Path>) -> Result<()> {
    write_y4m(clip, BufWriter::new(File::create(path)?))
}

pub(super) fn frame_from_bytes(width: usize, height: usize, mut buf: Vec<u8>) -> Result<Frame> {
    let luma_len = width * height;
    let chroma_len = (width / 2) * (height / 2);
    let v = buf.split_off(luma_len + chroma_len);
    let u = buf.split_off(luma_len);
    Frame::new(
        Plane::new(width, height, buf)?,
        Plane::new(width / 2, height / 2, u)?,
        Plane::new(width / 2, height / 2, v)?,
    )
}

pub(super) fn read_full<R: Read>(reader: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

/// Reads up to and excluding '\n'. Returns None at a clean end of stream.
fn read_line<R: BufRead>(reader: &mut R) -> Result<Option<Vec<u8>>> {
    let mut line = Vec::new();
    let n = reader
        .by_ref()
        .take(MAX_HEADER as u64 + 1)
        .read_until(b'\n', &mut line)?;
    if n == 0 {
        return Ok(None);
    }
    if line.last() != Some(&b'\n') {
        return Err(MediaError::MalformedHeader(
            "unterminated header line".into(),
        ));
    }
    line.pop();
    Ok(Some(line))
}

fn parse_dim(value: &str, tag: &str) -> Result<usize> {
    match value.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(MediaError::MalformedHeader(format!(
            "bad {tag} value `{value}`"
        ))),
    }
}

fn parse_ratio(value: &str) -> Result<FrameRate> {
    let bad = || MediaError::MalformedHeader(format!("bad frame rate `{value}`"));
    let (num, den) = value.split_once(':').ok_or_else(bad)?;
    let num = num.parse().map_err(|_| bad())?;
    let den = den.parse().map_err(|_| bad())?;
    FrameRate::new(num, den).map_err(|_| bad())
}

fn check_colorspace(value: &str) -> Result<()> {
    match value {
        "420" | "420jpeg" | "420paldv" | "420mpeg2" => Ok(()),
        other => Err(MediaError::UnsupportedColorspace(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream(header: &str, frames: usize, payload: usize) -> Vec<u8> {
        let mut s = header.as_bytes().to_vec();
        s.push(b'\n');
        for i in 0..frames {
            s.extend_from_slice(b"FRAME\n");
            s.extend((0..payload).map(|j| ((i * 31 + j) % 256) as u8));
        }
        s
    }

    #[test]
    fn parses_minimal_stream() {
        let s = stream("YUV4MPEG2 W4 H4 F25:1", 2, 24);
        let clip = read_y4m(&s[..]).unwrap();
        assert_eq!((clip.width(), clip.height(), clip.len()), (4, 4, 2));
        assert_eq!(clip.fps(), FrameRate { num: 25, den: 1 });
    }

    #[test]
    fn minimal_stream_round_trips() {
        let s = stream("YUV4MPEG2 W4 H4 F25:1", 2, 24);
        let mut out = Vec::new();
        write_y4m(&read_y4m(&s[..]).unwrap(), &mut out).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn bad_magic() {
        let s = stream("XUV4MPEG2 W4 H4 F25:1", 1, 24);
        assert!(matches!(
            read_y4m(&s[..]),
            Err(MediaError::MalformedHeader(_))
        ));
    }

    #[test]
    fn missing_params() {
        for h in [
            "YUV4MPEG2 H4 F25:1",
            "YUV4MPEG2 W4 F25:1",
            "YUV4MPEG2 W4 H4",
        ] {
            let s = stream(h, 1, 24);
            assert!(matches!(
                read_y4m(&s[..]),
                Err(MediaError::MalformedHeader(_))
            ));
        }
        let s = stream("YUV4MPEG2 W4 H4 F25:0", 1, 24);
        assert!(matches!(
            read_y4m(&s[..]),
            Err(MediaError::MalformedHeader(_))
        ));
    }

    #[test]
    fn truncated_frame() {
        let mut s = stream("YUV4MPEG2 W4 H4 F25:1", 2, 24);
        s.truncate(s.len() - 5);
        assert!(matches!(
            read_y4m(&s[..]),
            Err(MediaError::TruncatedFrame {
                index: 1,
                expected: 24,
                got: 19
            })
        ));
    }

    #[test]
    fn colorspaces() {
        let ok = stream(
            "YUV4MPEG2 W4 H4 F30000:1001 Ip A1:1 C420jpeg XYSCSS=420JPEG",
            1,
            24,
        );
        assert!(read_y4m(&ok[..]).is_ok());
        for c in ["C444", "C422", "C420p10", "Cmono"] {
            let s = stream(&format!("YUV4MPEG2 W4 H4 F25:1 {c}"), 1, 24);
            assert!(matches!(
                read_y4m(&s[..]),
                Err(MediaError::UnsupportedColorspace(_))
            ));
        }
    }

    #[test]
    fn frame_params_are_tolerated() {
        let mut s = b"YUV4MPEG2 W2 H2 F1:1\nFRAME Ip\n".to_vec();
        s.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        let clip = read_y4m(&s[..]).unwrap();
        assert_eq!(clip.frame(0).luma().data(), &[1, 2, 3, 4]);
        assert_eq!(clip.frame(0).chroma_u().data(), &[5]);
        assert_eq!(clip.frame(0).chroma_v().data(), &[6]);
    }

    #[test]
    fn header_without_frames_is_empty_clip() {
        let s = b"YUV4MPEG2 W2 H2 F1:1\n";
        assert!(matches!(read_y4m(&s[..]), Err(MediaError::EmptyClip)));
    }

    #[test]
    fn writes_zero_clip() {
        let f = Frame::filled(4, 4, 0, 0, 0).unwrap();
        let clip = Clip::new("z", vec![f], FrameRate::new(25, 1).unwrap()).unwrap();
        let mut out = Vec::new();
        write_y4m(&clip, &mut out).unwrap();
        let mut expected = b"YUV4MPEG2 W4 H4 F25:1\nFRAME\n".to_vec();
        expected.extend([0u8; 24]);
        assert_eq!(out, expected);
    }

    #[test]
    fn ntsc_rate_in_header() {
        let f = Frame::filled(2, 2, 0, 0, 0).unwrap();
        let clip = Clip::new("n", vec![f], FrameRate::new(60000, 1001).unwrap()).unwrap();
        let mut out = Vec::new();
        write_y4m(&clip, &mut out).unwrap();
        let text = String::from_utf8_lossy(&out);
        assert!(text.starts_with("YUV4MPEG2 W2 H2 F60000:1001\n"));
    }

    fn arb_clip() -> impl Strategy<Value = Clip> {
        (
            1usize..=5,
            1usize..=5,
            1usize..=4,
            1u32..=120_000,
            1u32..=1001,
        )
            .prop_flat_map(|(hw, hh, n, num, den)| {
                let (w, h) = (hw * 2, hh * 2);
                let len = Frame::payload_len(w, h) * n;
                proptest::collection::vec(any::<u8>(), len).prop_map(move |bytes| {
                    let frames = bytes
                        .chunks(Frame::payload_len(w, h))
                        .map(|c| frame_from_bytes(w, h, c.to_vec()).unwrap())
                        .collect();
                    Clip::new("", frames, FrameRate::new(num, den).unwrap()).unwrap()
                })
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip_is_bit_exact(clip in arb_clip()) {
            let mut bytes = Vec::new();
            write_y4m(&clip, &mut bytes).unwrap();
            let back = read_y4m(&bytes[..]).unwrap();
            prop_assert_eq!(&back, &clip);
            let mut again = Vec::new();
            write_y4m(&back, &mut again).unwrap();
            prop_assert_eq!(again, bytes);
        }
    }
}
