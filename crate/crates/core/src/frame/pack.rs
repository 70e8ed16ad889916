//! Lossless rearrangement of a 4:2:0 frame into six half-resolution channels.
//!
//! Luma sample at row 2i+di, column 2j+dj lands in channel 2·di+dj at
//! (row i, column j), the PixelUnshuffle ordering; channels 4 and 5 are U
//! and V as-is.

use super::{check_dims, Channel, Frame};
use crate::error::{Error, Result};

pub const PACKED_CHANNELS: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct PackedFrame {
    pub width2: usize,
    pub height2: usize,
    pub channels: Vec<Channel>,
}

impl PackedFrame {
    pub fn new(channels: Vec<Channel>) -> Result<Self> {
        if channels.len() != PACKED_CHANNELS {
            return Err(Error::OperatorShape(format!(
                "packed frame needs {PACKED_CHANNELS} channels, got {}",
                channels.len()
            )));
        }
        let (w, h) = (channels[0].width, channels[0].height);
        if channels.iter().any(|c| c.width != w || c.height != h) {
            return Err(Error::OperatorShape("packed channels differ in size".into()));
        }
        Ok(Self {
            width2: w,
            height2: h,
            channels,
        })
    }
}

pub fn pack_six_channel(frame: &Frame) -> Result<PackedFrame> {
    check_dims(frame.width(), frame.height())?;
    let (w2, h2) = (frame.width() / 2, frame.height() / 2);
    let mut channels = Vec::with_capacity(PACKED_CHANNELS);
    for di in 0..2 {
        for dj in 0..2 {
            channels.push(Channel::from_fn(w2, h2, |col, row| {
                f32::from(frame.y.get(2 * col + dj, 2 * row + di))
            }));
        }
    }
    channels.push(frame.u.to_channel());
    channels.push(frame.v.to_channel());
    Ok(PackedFrame {
        width2: w2,
        height2: h2,
        channels,
    })
}

/// Inverse of [`pack_six_channel`]; values are rounded and clamped to the
/// sample range.
pub fn unpack_six_channel(p: &PackedFrame) -> Frame {
    let (w, h) = (p.width2 * 2, p.height2 * 2);
    let mut y = super::Plane::new(w, h, 0);
    for di in 0..2 {
        for dj in 0..2 {
            let c = &p.channels[2 * di + dj];
            for row in 0..p.height2 {
                for col in 0..p.width2 {
                    y.set(2 * col + dj, 2 * row + di, super::quantize_sample(c.get(col, row)));
                }
            }
        }
    }
    Frame {
        y,
        u: p.channels[4].to_plane(),
        v: p.channels[5].to_plane(),
        poc: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Plane;
    use proptest::prelude::*;

    #[test]
    fn two_by_two_phases() {
        let mut f = Frame::new(2, 2).unwrap();
        f.y = Plane::from_vec(2, 2, vec![1, 2, 3, 4]).unwrap();
        let p = pack_six_channel(&f).unwrap();
        let vals: Vec<f32> = p.channels[..4].iter().map(|c| c.get(0, 0)).collect();
        assert_eq!(vals, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.channels.iter().map(|c| c.data.len()).sum::<usize>(), 6);
    }

    #[test]
    fn constant_frame_constant_channels() {
        let f = Frame::filled(8, 6, 77, 130).unwrap();
        let p = pack_six_channel(&f).unwrap();
        for (i, c) in p.channels.iter().enumerate() {
            let want = if i < 4 { 77.0 } else { 130.0 };
            assert!(c.data.iter().all(|&v| v == want));
        }
    }

    #[test]
    fn unpack_clips() {
        let mut p = pack_six_channel(&Frame::new(4, 4).unwrap()).unwrap();
        p.channels[0].data.iter_mut().for_each(|v| *v = 400.0);
        p.channels[4].data.iter_mut().for_each(|v| *v = -20.0);
        let f = unpack_six_channel(&p);
        assert_eq!(f.y.get(0, 0), 255);
        assert_eq!(f.u.get(0, 0), 0);
    }

    #[test]
    fn zeros_unpack_to_zero_frame() {
        let p = PackedFrame::new(vec![Channel::zeros(3, 2); 6]).unwrap();
        let f = unpack_six_channel(&p);
        assert_eq!((f.width(), f.height()), (6, 4));
        assert!(f.planes().iter().all(|pl| pl.data().iter().all(|&s| s == 0)));
    }

    proptest! {
        #[test]
        fn pack_roundtrip(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
            let (w, h) = (w * 2, h * 2);
            let mut s = seed;
            let mut next = move || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 56) as u8 };
            let f = Frame::from_planes(
                Plane::from_fn(w, h, |_, _| next()),
                Plane::from_fn(w / 2, h / 2, |_, _| next()),
                Plane::from_fn(w / 2, h / 2, |_, _| next()),
            ).unwrap();
            let back = unpack_six_channel(&pack_six_channel(&f).unwrap());
            prop_assert!(back.same_samples(&f));
        }
    }
}
