//! YUV 4:2:0 pictures and the plane-level helpers shared by every other module.
//!
//! Samples are 8-bit. A [`Frame`] owns three [`Plane`]s; chroma planes are
//! exactly half the luma size in each dimension, so luma dimensions must be
//! even. Floating-point planes ([`Channel`]) carry the packed and feature
//! representations used by the enhancement network.

mod metrics;
mod pack;
mod tile;
mod y4m;

pub use metrics::{mse, plane_sse, psnr, psnr_from_mse, sse, sse_rect, PlaneSel, LOSSLESS_PSNR_DB};
pub use pack::{pack_six_channel, unpack_six_channel, PackedFrame, PACKED_CHANNELS};
pub use tile::{make_tile_grid, Rect, Tile, TileGrid, SMALL_FRAME_AREA};
pub use y4m::{read_raw_yuv420, read_y4m, write_y4m, Y4mHeader};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest representable sample value.
pub const MAX_SAMPLE: u8 = 255;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize, fill: u8) -> Self {
        Self {
            width,
            height,
            data: vec![fill; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "plane {}x{} needs {} samples, got {}",
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
    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Sample with coordinates clamped to the plane (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> u8 {
        let cx = x.clamp(0, self.width as i64 - 1) as usize;
        let cy = y.clamp(0, self.height as i64 - 1) as usize;
        self.data[cy * self.width + cx]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Copies the rectangle `r` into a new plane.
    pub fn crop(&self, r: Rect) -> Plane {
        Plane::from_fn(r.w, r.h, |x, y| self.get(r.x + x, r.y + y))
    }

    /// Writes `src` with its top-left corner at (`x0`, `y0`), copying only
    /// the `w`×`h` region starting at (`sx`, `sy`) inside `src`.
    pub fn blit(&mut self, src: &Plane, sx: usize, sy: usize, x0: usize, y0: usize, w: usize, h: usize) {
        for y in 0..h {
            let s = (sy + y) * src.width + sx;
            let d = (y0 + y) * self.width + x0;
            self.data[d..d + w].copy_from_slice(&src.data[s..s + w]);
        }
    }

    /// Grows the plane to `width`×`height` by replicating the right and
    /// bottom edges.
    pub fn extend_to(&self, width: usize, height: usize) -> Plane {
        Plane::from_fn(width, height, |x, y| {
            self.get(x.min(self.width - 1), y.min(self.height - 1))
        })
    }

    pub fn to_channel(&self) -> Channel {
        Channel {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f32::from(v)).collect(),
        }
    }
}

/// One YUV 4:2:0 picture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub y: Plane,
    pub u: Plane,
    pub v: Plane,
    pub poc: Option<u32>,
}

impl Frame {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, 0, 128)
    }

    pub fn filled(width: usize, height: usize, luma: u8, chroma: u8) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            y: Plane::new(width, height, luma),
            u: Plane::new(width / 2, height / 2, chroma),
            v: Plane::new(width / 2, height / 2, chroma),
            poc: None,
        })
    }

    pub fn from_planes(y: Plane, u: Plane, v: Plane) -> Result<Self> {
        check_dims(y.width, y.height)?;
        if u.width != y.width / 2 || u.height != y.height / 2 || v.width != u.width || v.height != u.height {
            return Err(Error::DimensionMismatch(format!(
                "chroma {}x{}/{}x{} for luma {}x{}",
                u.width, u.height, v.width, v.height, y.width, y.height
            )));
        }
        Ok(Self { y, u, v, poc: None })
    }

    pub fn with_poc(mut self, poc: u32) -> Self {
        self.poc = Some(poc);
        self
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.y.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.y.height
    }

    pub fn planes(&self) -> [&Plane; 3] {
        [&self.y, &self.u, &self.v]
    }

    pub fn planes_mut(&mut self) -> [&mut Plane; 3] {
        [&mut self.y, &mut self.u, &mut self.v]
    }

    /// True when both frames hold the same samples, ignoring the POC.
    pub fn same_samples(&self, other: &Frame) -> bool {
        self.y == other.y && self.u == other.u && self.v == other.v
    }

    /// Crops a luma-aligned rectangle (even origin and size).
    pub fn crop(&self, r: Rect) -> Frame {
        debug_assert!(r.x.is_multiple_of(2) && r.y.is_multiple_of(2) && r.w.is_multiple_of(2) && r.h.is_multiple_of(2));
        let c = r.half();
        Frame {
            y: self.y.crop(r),
            u: self.u.crop(c),
            v: self.v.crop(c),
            poc: self.poc,
        }
    }

    /// Copies the core region of `tile` from `src`, where `src` covers the
    /// tile's padded rectangle.
    pub fn blit_core(&mut self, src: &Frame, tile: &Tile) {
        let (ox, oy) = (tile.core.x - tile.padded.x, tile.core.y - tile.padded.y);
        let c = tile.core;
        self.y.blit(&src.y, ox, oy, c.x, c.y, c.w, c.h);
        for (dst, s) in [(&mut self.u, &src.u), (&mut self.v, &src.v)] {
            dst.blit(s, ox / 2, oy / 2, c.x / 2, c.y / 2, c.w / 2, c.h / 2);
        }
    }

    /// Copies the luma-aligned rectangle `r` from an equally sized frame.
    pub fn copy_region(&mut self, src: &Frame, r: Rect) {
        self.y.blit(&src.y, r.x, r.y, r.x, r.y, r.w, r.h);
        let c = r.half();
        self.u.blit(&src.u, c.x, c.y, c.x, c.y, c.w, c.h);
        self.v.blit(&src.v, c.x, c.y, c.x, c.y, c.w, c.h);
    }

    pub fn sample_count(&self) -> usize {
        self.y.data.len() + self.u.data.len() + self.v.data.len()
    }

    /// SHA-256 over the three planes in Y, U, V order.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for p in self.planes() {
            h.update(&p.data);
        }
        h.finalize().into()
    }
}

pub(crate) fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "must be positive",
        });
    }
    if !width.is_multiple_of(2) || !height.is_multiple_of(2) {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "4:2:0 needs even dimensions",
        });
    }
    Ok(())
}

/// A floating-point plane: packed channels, feature channels, confidences.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl Channel {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, v: f32) -> Self {
        Self {
            width,
            height,
            data: vec![v; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
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
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> f32 {
        let cx = x.clamp(0, self.width as i64 - 1) as usize;
        let cy = y.clamp(0, self.height as i64 - 1) as usize;
        self.data[cy * self.width + cx]
    }

    /// Rounds to the nearest integer (half away from zero) and clamps to the
    /// 8-bit sample range.
    pub fn to_plane(&self) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| quantize_sample(v)).collect(),
        }
    }
}

#[inline]
pub fn quantize_sample(v: f32) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round().clamp(0.0, f32::from(MAX_SAMPLE)) as u8
}
