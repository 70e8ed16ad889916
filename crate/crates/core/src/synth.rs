//! Deterministic synthetic content for tests, examples and experiments.
//!
//! The texture is a continuous multi-octave value-noise field, so it can be
//! sampled at translated, rotated or scaled coordinates without resampling
//! artifacts of its own.

use crate::flow::sample_bilinear;
use crate::frame::{Frame, Plane};

#[inline]
fn hash2(ix: i64, iy: i64, seed: u64) -> f64 {
    let mut h = (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ seed.wrapping_mul(0x1656_67B1_9E37_79F9);
    h ^= h >> 33;
    h = h.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    h ^= h >> 33;
    h = h.wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    h ^= h >> 33;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn value_noise(x: f64, y: f64, cell: f64, seed: u64) -> f64 {
    let (gx, gy) = (x / cell, y / cell);
    let (x0, y0) = (gx.floor(), gy.floor());
    let (fx, fy) = (gx - x0, gy - y0);
    let s = |t: f64| t * t * (3.0 - 2.0 * t);
    let (sx, sy) = (s(fx), s(fy));
    let (ix, iy) = (x0 as i64, y0 as i64);
    let a = hash2(ix, iy, seed);
    let b = hash2(ix + 1, iy, seed);
    let c = hash2(ix, iy + 1, seed);
    let d = hash2(ix + 1, iy + 1, seed);
    let top = a + sx * (b - a);
    let bot = c + sx * (d - c);
    top + sy * (bot - top)
}

/// Texture value in [0, 1] at a continuous position.
pub fn texture(x: f64, y: f64, seed: u64) -> f64 {
    0.40 * value_noise(x, y, 29.0, seed)
        + 0.30 * value_noise(x, y, 11.0, seed ^ 0x51)
        + 0.20 * value_noise(x, y, 4.3, seed ^ 0xA3)
        + 0.10 * value_noise(x, y, 1.7, seed ^ 0x3C)
}

fn to_sample(v: f64, lo: f64, span: f64) -> u8 {
    (lo + span * v).round().clamp(0.0, 255.0) as u8
}

/// A frame sampling the texture through `map`, which takes a luma-grid
/// position to texture coordinates.
pub fn mapped_frame(w: usize, h: usize, seed: u64, map: impl Fn(f64, f64) -> (f64, f64)) -> Frame {
    let y = Plane::from_fn(w, h, |x, yy| {
        let (tx, ty) = map(x as f64, yy as f64);
        to_sample(texture(tx, ty, seed), 16.0, 220.0)
    });
    let chroma = |s: u64| {
        Plane::from_fn(w / 2, h / 2, |x, yy| {
            let (tx, ty) = map(2.0 * x as f64, 2.0 * yy as f64);
            to_sample(texture(tx, ty, s), 80.0, 96.0)
        })
    };
    Frame::from_planes(y, chroma(seed ^ 0xC0FFEE), chroma(seed ^ 0xBEEF)).expect("even dimensions")
}

/// The texture seen through a window whose top-left corner sits at
/// (`ox`, `oy`).
pub fn pan_frame(w: usize, h: usize, ox: i64, oy: i64, seed: u64) -> Frame {
    mapped_frame(w, h, seed, |x, y| (x + ox as f64, y + oy as f64))
}

pub fn textured_frame(w: usize, h: usize, seed: u64) -> Frame {
    pan_frame(w, h, 0, 0, seed)
}

/// A camera panning right by `step` pixels per frame; content moves left.
pub fn pan_sequence(w: usize, h: usize, frames: usize, step: i64, seed: u64) -> Vec<Frame> {
    (0..frames)
        .map(|t| pan_frame(w, h, step * t as i64, 0, seed).with_poc(t as u32))
        .collect()
}

/// Texture rotating about the frame centre by `degrees` per frame.
pub fn rotating_sequence(w: usize, h: usize, frames: usize, degrees: f64, seed: u64) -> Vec<Frame> {
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    (0..frames)
        .map(|t| {
            let a = (degrees * t as f64).to_radians();
            let (s, c) = a.sin_cos();
            mapped_frame(w, h, seed, |x, y| {
                let (dx, dy) = (x - cx, y - cy);
                (cx + c * dx - s * dy + 500.0, cy + s * dx + c * dy + 500.0)
            })
            .with_poc(t as u32)
        })
        .collect()
}

/// Simulated camera motion over a still picture: a `w`×`h` window that
/// drifts along a smooth sub-pixel path and slowly zooms in.
pub fn camera_path_sequence(source: &Frame, w: usize, h: usize, frames: usize) -> Vec<Frame> {
    let planes = [source.y.to_channel(), source.u.to_channel(), source.v.to_channel()];
    let (sw, sh) = (source.width() as f64, source.height() as f64);
    let max_scale = ((sw - 2.0) / w as f64).min((sh - 2.0) / h as f64);
    (0..frames)
        .map(|t| {
            let tt = t as f64;
            let scale = (1.0 - 0.004 * tt).max(0.5) * max_scale.min(1.15);
            let (vw, vh) = (w as f64 * scale, h as f64 * scale);
            let x0 = (sw - vw) * (0.15 + 0.35 * (1.0 - (tt * 0.07).cos()));
            let y0 = (sh - vh) * (0.3 + 0.2 * (tt * 0.11).sin());
            let sample = |p: &crate::frame::Channel, k: f64, pw: usize, ph: usize| {
                Plane::from_fn(pw, ph, |x, y| {
                    let sx = (x0 + x as f64 * k * scale) / k;
                    let sy = (y0 + y as f64 * k * scale) / k;
                    let v = sample_bilinear(p, sx as f32, sy as f32);
                    v.round().clamp(0.0, 255.0) as u8
                })
            };
            Frame::from_planes(
                sample(&planes[0], 1.0, w, h),
                sample(&planes[1], 2.0, w / 2, h / 2),
                sample(&planes[2], 2.0, w / 2, h / 2),
            )
            .expect("even dimensions")
            .with_poc(t as u32)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pan_is_exact_integer_shift() {
        let seq = pan_sequence(32, 16, 3, 8, 4);
        for y in 0..16 {
            for x in 0..24 {
                assert_eq!(seq[1].y.get(x, y), seq[0].y.get(x + 8, y));
            }
        }
        for y in 0..8 {
            for x in 0..12 {
                assert_eq!(seq[1].u.get(x, y), seq[0].u.get(x + 4, y));
            }
        }
    }

    #[test]
    fn texture_has_contrast() {
        let f = textured_frame(64, 64, 1);
        let (lo, hi) = f.y.data().iter().fold((255, 0), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(hi - lo > 80);
    }

    #[test]
    fn deterministic() {
        assert_eq!(rotating_sequence(16, 16, 2, 3.0, 9), rotating_sequence(16, 16, 2, 3.0, 9));
    }
}
