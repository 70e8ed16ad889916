//! Motion fields: full-search block matching, the intermediate-flow estimator
//! and its reuse map, bilinear backward warping and flow downsampling.
//!
//! Vectors always point from a position in the frame being described to the
//! matching content in the other frame, so `warp(other, flow)` pulls that
//! content back onto the described frame's grid.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{Channel, Frame, Plane};

/// Block size for motion search.
pub const MATCH_BLOCK: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FlowTag {
    /// From the intermediate instant to frame 0.
    TTo0,
    /// From the intermediate instant to frame 1.
    TTo1,
    ZeroTo1,
    OneTo0,
    /// Raw block-matching output.
    Motion,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    pub fn new(dx: i32, dy: i32) -> Self {
        Self { dx, dy }
    }

    fn order_key(self, sad: u32) -> (u32, u32, i32, i32) {
        (sad, self.dx.unsigned_abs() + self.dy.unsigned_abs(), self.dx, self.dy)
    }
}

/// Dense per-pixel displacement field.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub dx: Vec<f32>,
    pub dy: Vec<f32>,
    /// Mean absolute luma difference left by the vector at each pixel; zero
    /// for fields that were not matched.
    pub residual: Vec<f32>,
    pub tag: FlowTag,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize, tag: FlowTag) -> Self {
        Self::constant(width, height, 0.0, 0.0, tag)
    }

    pub fn constant(width: usize, height: usize, dx: f32, dy: f32, tag: FlowTag) -> Self {
        Self {
            width,
            height,
            dx: vec![dx; width * height],
            dy: vec![dy; width * height],
            residual: vec![0.0; width * height],
            tag,
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f32, f32) {
        let i = y * self.width + x;
        (self.dx[i], self.dy[i])
    }

    pub fn max_abs(&self) -> f32 {
        self.dx
            .iter()
            .chain(&self.dy)
            .fold(0.0f32, |m, v| m.max(v.abs()))
    }

    fn map(&self, scale: f32, tag: FlowTag) -> FlowField {
        FlowField {
            width: self.width,
            height: self.height,
            dx: self.dx.iter().map(|v| v * scale).collect(),
            dy: self.dy.iter().map(|v| v * scale).collect(),
            residual: self.residual.clone(),
            tag,
        }
    }

    /// Dumps the field as `x,y,dx,dy` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "y", "dx", "dy"])?;
        for y in 0..self.height {
            for x in 0..self.width {
                let (dx, dy) = self.at(x, y);
                out.serialize((x, y, dx, dy))?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn same_size(a: (usize, usize), b: (usize, usize), what: &str) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "{what}: {}x{} vs {}x{}",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

/// A plane copied into a buffer with an edge-replicated margin, so block
/// reads reaching outside the picture need no per-sample clamping.
pub struct PaddedPlane {
    margin: usize,
    stride: usize,
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl PaddedPlane {
    pub fn new(p: &Plane, margin: usize) -> Self {
        let stride = p.width() + 2 * margin;
        let rows = p.height() + 2 * margin;
        let mut data = Vec::with_capacity(stride * rows);
        for y in 0..rows {
            let sy = y.saturating_sub(margin).min(p.height() - 1);
            let row = p.row(sy);
            data.extend(std::iter::repeat_n(row[0], margin));
            data.extend_from_slice(row);
            data.extend(std::iter::repeat_n(row[row.len() - 1], margin));
        }
        Self {
            margin,
            stride,
            width: p.width(),
            height: p.height(),
            data,
        }
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// Row `y` of the picture starting at column `x`, both relative to the
    /// picture origin and allowed to lie within the margin.
    #[inline]
    pub fn row_at(&self, x: i64, y: i64, len: usize) -> &[u8] {
        let m = self.margin as i64;
        let xi = (x + m) as usize;
        let start = (y + m) as usize * self.stride + xi;
        &self.data[start..start + len]
    }

    /// Sample at any position; outside the margin falls back to clamping.
    #[inline]
    pub fn get(&self, x: i64, y: i64) -> u8 {
        let m = self.margin as i64;
        let cx = x.clamp(-m, self.width as i64 - 1 + m);
        let cy = y.clamp(-m, self.height as i64 - 1 + m);
        self.data[(cy + m) as usize * self.stride + (cx + m) as usize]
    }

    /// True when a `w`×`h` block at (`x`, `y`) lies within the padded area.
    #[inline]
    pub fn covers(&self, x: i64, y: i64, w: usize, h: usize) -> bool {
        let m = self.margin as i64;
        x >= -m && y >= -m && x + w as i64 <= self.width as i64 + m && y + h as i64 <= self.height as i64 + m
    }
}

#[inline]
fn sad_row(a: &[u8], b: &[u8]) -> u32 {
    if let (Ok(a), Ok(b)) = (<&[u8; 16]>::try_from(a), <&[u8; 16]>::try_from(b)) {
        return a.iter().zip(b).map(|(&x, &y)| u32::from(x.abs_diff(y))).sum();
    }
    a.iter().zip(b).map(|(&x, &y)| u32::from(x.abs_diff(y))).sum()
}

/// Sum of absolute differences between the `w`×`h` block of `cur` at
/// (`bx`, `by`) and the reference block displaced by `mv`, giving up once
/// the running sum exceeds `limit`.
#[inline]
fn block_sad(
    reference: &PaddedPlane,
    cur: &Plane,
    bx: usize,
    by: usize,
    w: usize,
    h: usize,
    mv: MotionVector,
    limit: u32,
) -> u32 {
    let mut sad = 0;
    for row in 0..h {
        let c = &cur.row(by + row)[bx..bx + w];
        let r = reference.row_at(bx as i64 + i64::from(mv.dx), (by + row) as i64 + i64::from(mv.dy), w);
        sad += sad_row(c, r);
        if sad > limit {
            break;
        }
    }
    sad
}

/// Exhaustive integer search over ±`range` for one block. Minimises SAD,
/// then |dx|+|dy|, then (dx, dy) lexicographically.
pub fn search_block(
    reference: &PaddedPlane,
    cur: &Plane,
    bx: usize,
    by: usize,
    w: usize,
    h: usize,
    range: usize,
) -> (MotionVector, u32) {
    debug_assert!(reference.margin >= range);
    let r = range as i32;
    let mut best = MotionVector::ZERO;
    let mut best_sad = block_sad(reference, cur, bx, by, w, h, best, u32::MAX);
    for dy in -r..=r {
        for dx in -r..=r {
            let mv = MotionVector::new(dx, dy);
            let sad = block_sad(reference, cur, bx, by, w, h, mv, best_sad);
            if mv.order_key(sad) < best.order_key(best_sad) {
                best = mv;
                best_sad = sad;
            }
        }
    }
    (best, best_sad)
}

/// Per-block luma motion from `cur` to `reference`, expanded to a per-pixel
/// field on `cur`'s grid.
pub fn block_match(reference: &Frame, cur: &Frame, search_range: usize, block: usize) -> Result<FlowField> {
    same_size(
        (reference.width(), reference.height()),
        (cur.width(), cur.height()),
        "block_match",
    )?;
    if block == 0 {
        return Err(Error::Config("block size must be positive".into()));
    }
    let (w, h) = (cur.width(), cur.height());
    let padded = PaddedPlane::new(&reference.y, search_range + block);
    let mut flow = FlowField::zeros(w, h, FlowTag::Motion);
    for by in (0..h).step_by(block) {
        for bx in (0..w).step_by(block) {
            let (bw, bh) = (block.min(w - bx), block.min(h - by));
            let (mv, sad) = search_block(&padded, &cur.y, bx, by, bw, bh, search_range);
            let residual = sad as f32 / (bw * bh) as f32;
            for y in by..by + bh {
                for x in bx..bx + bw {
                    flow.dx[y * w + x] = mv.dx as f32;
                    flow.dy[y * w + x] = mv.dy as f32;
                    flow.residual[y * w + x] = residual;
                }
            }
        }
    }
    Ok(flow)
}

/// Intermediate flows at t = 0.5 under a linear-motion model:
/// `(F_t→0, F_t→1)`, each half of the corresponding block-matching field.
pub fn estimate_intermediate_flows(i0: &Frame, i1: &Frame, search_range: usize) -> Result<(FlowField, FlowField)> {
    let to0 = block_match(i0, i1, search_range, MATCH_BLOCK)?;
    let to1 = block_match(i1, i0, search_range, MATCH_BLOCK)?;
    Ok((to0.map(0.5, FlowTag::TTo0), to1.map(0.5, FlowTag::TTo1)))
}

/// Recovers the endpoint flows `(F_0→1, F_1→0)` from the intermediate ones
/// by doubling.
pub fn reuse_flows(t_to_0: &FlowField, t_to_1: &FlowField) -> Result<(FlowField, FlowField)> {
    same_size(
        (t_to_0.width, t_to_0.height),
        (t_to_1.width, t_to_1.height),
        "reuse_flows",
    )?;
    Ok((t_to_1.map(2.0, FlowTag::ZeroTo1), t_to_0.map(2.0, FlowTag::OneTo0)))
}

/// Halves the resolution: 2×2 mean of each component, scaled by 0.5. The
/// residual is averaged without scaling.
pub fn downsample_flow(flow: &FlowField) -> Result<FlowField> {
    if !flow.width.is_multiple_of(2) || !flow.height.is_multiple_of(2) {
        return Err(Error::InvalidDimensions {
            width: flow.width,
            height: flow.height,
            reason: "flow downsampling needs even dimensions",
        });
    }
    let (w2, h2) = (flow.width / 2, flow.height / 2);
    let mut out = FlowField::zeros(w2, h2, flow.tag);
    let mean = |src: &[f32], x: usize, y: usize| {
        let w = flow.width;
        let s = src[2 * y * w + 2 * x] + src[2 * y * w + 2 * x + 1] + src[(2 * y + 1) * w + 2 * x]
            + src[(2 * y + 1) * w + 2 * x + 1];
        s * 0.25
    };
    for y in 0..h2 {
        for x in 0..w2 {
            out.dx[y * w2 + x] = 0.5 * mean(&flow.dx, x, y);
            out.dy[y * w2 + x] = 0.5 * mean(&flow.dy, x, y);
            out.residual[y * w2 + x] = mean(&flow.residual, x, y);
        }
    }
    Ok(out)
}

#[inline]
fn lerp(a: f32, b: f32, t: f32) -> f32 {
    a + t * (b - a)
}

/// Bilinear sample with coordinates clamped to the channel.
#[inline]
pub fn sample_bilinear(c: &Channel, x: f32, y: f32) -> f32 {
    let xc = x.clamp(0.0, (c.width - 1) as f32);
    let yc = y.clamp(0.0, (c.height - 1) as f32);
    let (x0, y0) = (xc.floor() as usize, yc.floor() as usize);
    let (fx, fy) = (xc - x0 as f32, yc - y0 as f32);
    let (x1, y1) = ((x0 + 1).min(c.width - 1), (y0 + 1).min(c.height - 1));
    let top = lerp(c.get(x0, y0), c.get(x1, y0), fx);
    let bottom = lerp(c.get(x0, y1), c.get(x1, y1), fx);
    lerp(top, bottom, fy)
}

/// Backward warping: `out(x, y) = input(x + dx, y + dy)`.
pub trait Warp: Sized {
    fn warp(&self, flow: &FlowField) -> Result<Self>;
}

impl Warp for Channel {
    fn warp(&self, flow: &FlowField) -> Result<Self> {
        same_size((self.width, self.height), (flow.width, flow.height), "warp")?;
        Ok(Channel::from_fn(self.width, self.height, |x, y| {
            let (dx, dy) = flow.at(x, y);
            sample_bilinear(self, x as f32 + dx, y as f32 + dy)
        }))
    }
}

impl Warp for Frame {
    /// Luma follows `flow`; chroma follows its downsampled version. Results
    /// are rounded back to 8-bit samples.
    fn warp(&self, flow: &FlowField) -> Result<Self> {
        let half = downsample_flow(flow)?;
        let y = self.y.to_channel().warp(flow)?.to_plane();
        let u = self.u.to_channel().warp(&half)?.to_plane();
        let v = self.v.to_channel().warp(&half)?.to_plane();
        let mut f = Frame::from_planes(y, u, v)?;
        f.poc = self.poc;
        Ok(f)
    }
}
