//! YUV4MPEG2 reading and writing, 8-bit 4:2:0 only.

use std::io::Write;

use super::{check_dims, Frame, Plane};
use crate::error::{Error, Result};

const SIGNATURE: &[u8] = b"YUV4MPEG2";
const FRAME_TAG: &[u8] = b"FRAME";

/// Stream parameters carried by the Y4M header line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Y4mHeader {
    pub width: usize,
    pub height: usize,
    pub fps_num: u32,
    pub fps_den: u32,
}

impl Y4mHeader {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            fps_num: 30,
            fps_den: 1,
        }
    }

    pub fn fps(&self) -> f64 {
        f64::from(self.fps_num) / f64::from(self.fps_den.max(1))
    }

    pub fn frame_bytes(&self) -> usize {
        self.width * self.height + 2 * (self.width / 2) * (self.height / 2)
    }
}

fn parse_header(line: &[u8]) -> Result<Y4mHeader> {
    let line = std::str::from_utf8(line).map_err(|_| Error::Y4mHeader("not ASCII".into()))?;
    let mut tokens = line.split(' ').filter(|t| !t.is_empty());
    if tokens.next().map(str::as_bytes) != Some(SIGNATURE) {
        return Err(Error::Y4mHeader("missing YUV4MPEG2 signature".into()));
    }
    let (mut width, mut height) = (None, None);
    let (mut fps_num, mut fps_den) = (30, 1);
    for tok in tokens {
        let (tag, val) = tok.split_at(1);
        match tag {
            "W" => width = Some(parse_num::<usize>(val, "W")?),
            "H" => height = Some(parse_num::<usize>(val, "H")?),
            "F" => {
                let (n, d) = val
                    .split_once(':')
                    .ok_or_else(|| Error::Y4mHeader(format!("bad frame rate `{val}`")))?;
                fps_num = parse_num(n, "F")?;
                fps_den = parse_num(d, "F")?;
                if fps_num == 0 || fps_den == 0 {
                    return Err(Error::Y4mHeader(format!("bad frame rate `{val}`")));
                }
            }
            "C" => match val {
                "420" | "420jpeg" | "420paldv" | "420mpeg2" => {}
                other => return Err(Error::UnsupportedColorspace(other.to_string())),
            },
            // interlacing, aspect ratio and extensions carry nothing we use
            "I" | "A" | "X" => {}
            _ => return Err(Error::Y4mHeader(format!("unknown parameter `{tok}`"))),
        }
    }
    let width = width.ok_or_else(|| Error::Y4mHeader("missing W".into()))?;
    let height = height.ok_or_else(|| Error::Y4mHeader("missing H".into()))?;
    check_dims(width, height)?;
    Ok(Y4mHeader {
        width,
        height,
        fps_num,
        fps_den,
    })
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Y4mHeader(format!("bad {what} value `{s}`")))
}

fn split_line(data: &[u8]) -> Option<(&[u8], &[u8])> {
    let nl = data.iter().position(|&b| b == b'\n')?;
    Some((&data[..nl], &data[nl + 1..]))
}

/// Parses a Y4M stream. Frames come back in stream order with `poc` set to
/// their index.
pub fn read_y4m(data: &[u8]) -> Result<(Y4mHeader, Vec<Frame>)> {
    let (line, mut rest) =
        split_line(data).ok_or_else(|| Error::Y4mHeader("unterminated header".into()))?;
    let header = parse_header(line)?;
    let size = header.frame_bytes();
    let mut frames = Vec::new();
    while !rest.is_empty() {
        let (marker, payload) = split_line(rest).ok_or(Error::TruncatedFrame {
            frame: frames.len(),
            needed: size,
            available: 0,
        })?;
        if !marker.starts_with(FRAME_TAG) {
            return Err(Error::Y4mHeader(format!(
                "expected FRAME marker before frame {}",
                frames.len()
            )));
        }
        if payload.len() < size {
            return Err(Error::TruncatedFrame {
                frame: frames.len(),
                needed: size,
                available: payload.len(),
            });
        }
        let mut f = frame_from_bytes(&payload[..size], header.width, header.height)?;
        f.poc = Some(frames.len() as u32);
        frames.push(f);
        rest = &payload[size..];
    }
    Ok((header, frames))
}

fn frame_from_bytes(buf: &[u8], width: usize, height: usize) -> Result<Frame> {
    let luma = width * height;
    let chroma = (width / 2) * (height / 2);
    let y = Plane::from_vec(width, height, buf[..luma].to_vec())?;
    let u = Plane::from_vec(width / 2, height / 2, buf[luma..luma + chroma].to_vec())?;
    let v = Plane::from_vec(width / 2, height / 2, buf[luma + chroma..luma + 2 * chroma].to_vec())?;
    Frame::from_planes(y, u, v)
}

/// Reads headerless planar 4:2:0 data with externally supplied dimensions.
pub fn read_raw_yuv420(data: &[u8], width: usize, height: usize) -> Result<Vec<Frame>> {
    check_dims(width, height)?;
    let size = Y4mHeader::new(width, height).frame_bytes();
    if !data.len().is_multiple_of(size) {
        return Err(Error::TruncatedFrame {
            frame: data.len() / size,
            needed: size,
            available: data.len() % size,
        });
    }
    data.chunks_exact(size)
        .enumerate()
        .map(|(i, c)| frame_from_bytes(c, width, height).map(|f| f.with_poc(i as u32)))
        .collect()
}

/// Serializes `frames` after a header line built from `header`.
pub fn write_y4m(header: &Y4mHeader, frames: &[Frame]) -> Result<Vec<u8>> {
    check_dims(header.width, header.height)?;
    let mut out = Vec::with_capacity(64 + frames.len() * (header.frame_bytes() + 6));
    writeln!(
        out,
        "YUV4MPEG2 W{} H{} F{}:{} Ip A1:1 C420",
        header.width, header.height, header.fps_num, header.fps_den
    )?;
    for (i, f) in frames.iter().enumerate() {
        if f.width() != header.width || f.height() != header.height {
            return Err(Error::DimensionMismatch(format!(
                "frame {} is {}x{}, stream is {}x{}",
                i,
                f.width(),
                f.height(),
                header.width,
                header.height
            )));
        }
        out.extend_from_slice(FRAME_TAG);
        out.push(b'\n');
        for p in f.planes() {
            out.extend_from_slice(p.data());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray_stream(w: usize, h: usize, n: usize) -> Vec<u8> {
        let mut s = format!("YUV4MPEG2 W{w} H{h} F30:1\n").into_bytes();
        for _ in 0..n {
            s.extend_from_slice(b"FRAME\n");
            s.extend(std::iter::repeat_n(128u8, w * h * 3 / 2));
        }
        s
    }

    #[test]
    fn constant_two_frames() {
        let (hdr, frames) = read_y4m(&gray_stream(16, 16, 2)).unwrap();
        assert_eq!((hdr.width, hdr.height), (16, 16));
        assert_eq!(frames.len(), 2);
        for (i, f) in frames.iter().enumerate() {
            assert_eq!(f.poc, Some(i as u32));
            assert!(f.planes().iter().all(|p| p.data().iter().all(|&s| s == 128)));
        }
    }

    #[test]
    fn cif_class_d_frame_size() {
        let hdr = parse_header(b"YUV4MPEG2 W416 H240 F30:1").unwrap();
        assert_eq!(hdr.frame_bytes(), 416 * 240 + 2 * 208 * 120);
        let (_, frames) = read_y4m(&gray_stream(416, 240, 1)).unwrap();
        assert_eq!((frames[0].width(), frames[0].height()), (416, 240));
    }

    #[test]
    fn truncated_payload() {
        let mut s = gray_stream(16, 16, 2);
        s.truncate(s.len() - 10);
        assert!(matches!(read_y4m(&s), Err(Error::TruncatedFrame { frame: 1, .. })));
    }

    #[test]
    fn rejects_other_colorspaces() {
        let s = b"YUV4MPEG2 W16 H16 F30:1 C444\n";
        assert!(matches!(read_y4m(s), Err(Error::UnsupportedColorspace(_))));
        assert!(matches!(read_y4m(b"YUV4MPEG W16 H16\n"), Err(Error::Y4mHeader(_))));
        assert!(read_y4m(b"YUV4MPEG2 W16\n").is_err());
    }

    #[test]
    fn empty_list_is_header_only() {
        let out = write_y4m(&Y4mHeader::new(2, 2), &[]).unwrap();
        assert_eq!(out, b"YUV4MPEG2 W2 H2 F30:1 Ip A1:1 C420\n");
        assert!(read_y4m(&out).unwrap().1.is_empty());
    }

    #[test]
    fn tiny_frame_layout() {
        let f = Frame::filled(2, 2, 7, 9).unwrap();
        let out = write_y4m(&Y4mHeader::new(2, 2), &[f]).unwrap();
        let hdr_len = b"YUV4MPEG2 W2 H2 F30:1 Ip A1:1 C420\n".len();
        assert_eq!(&out[hdr_len..hdr_len + 6], b"FRAME\n");
        assert_eq!(&out[hdr_len + 6..], &[7, 7, 7, 7, 9, 9]);
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let a = Frame::new(4, 4).unwrap();
        let b = Frame::new(6, 4).unwrap();
        assert!(write_y4m(&Y4mHeader::new(4, 4), &[a, b]).is_err());
    }

    #[test]
    fn raw_reader_needs_whole_frames() {
        let data = vec![0u8; 24 * 3];
        assert_eq!(read_raw_yuv420(&data, 4, 4).unwrap().len(), 3);
        assert!(read_raw_yuv420(&data[..30], 4, 4).is_err());
    }
}
