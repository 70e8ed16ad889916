//! Squared-error and PSNR metrics.

use super::{Frame, Plane, Rect};
use crate::error::{Error, Result};

/// Value written into reports in place of an infinite PSNR (zero MSE).
pub const LOSSLESS_PSNR_DB: f64 = 999.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlaneSel {
    Y,
    U,
    V,
    /// All samples of all three planes pooled together.
    All,
}

impl PlaneSel {
    pub const COMPONENTS: [PlaneSel; 3] = [PlaneSel::Y, PlaneSel::U, PlaneSel::V];
}

fn check_same(a: &Frame, b: &Frame) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Sum of squared differences between two planes of equal size.
pub fn plane_sse(a: &Plane, b: &Plane) -> u64 {
    debug_assert_eq!((a.width(), a.height()), (b.width(), b.height()));
    a.data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = i32::from(x) - i32::from(y);
            (d * d) as u64
        })
        .sum()
}

/// Sum of squared differences over the selected planes and the number of
/// samples it covers.
pub fn sse(a: &Frame, b: &Frame, sel: PlaneSel) -> Result<(u64, usize)> {
    check_same(a, b)?;
    let pick = |p: usize| (plane_sse(a.planes()[p], b.planes()[p]), a.planes()[p].data().len());
    Ok(match sel {
        PlaneSel::Y => pick(0),
        PlaneSel::U => pick(1),
        PlaneSel::V => pick(2),
        PlaneSel::All => (0..3).map(pick).fold((0, 0), |acc, (s, n)| (acc.0 + s, acc.1 + n)),
    })
}

/// SSE over a luma-aligned rectangle: luma samples inside `r` plus the
/// co-located chroma samples inside `r` halved.
pub fn sse_rect(a: &Frame, b: &Frame, r: Rect) -> Result<(u64, usize)> {
    check_same(a, b)?;
    let mut total = 0u64;
    let mut count = 0usize;
    let c = r.half();
    for (pa, pb, rr) in [(&a.y, &b.y, r), (&a.u, &b.u, c), (&a.v, &b.v, c)] {
        for y in rr.y..rr.y + rr.h {
            let ra = &pa.row(y)[rr.x..rr.x + rr.w];
            let rb = &pb.row(y)[rr.x..rr.x + rr.w];
            for (&x0, &x1) in ra.iter().zip(rb) {
                let d = i32::from(x0) - i32::from(x1);
                total += (d * d) as u64;
            }
        }
        count += rr.w * rr.h;
    }
    Ok((total, count))
}

pub fn mse(a: &Frame, b: &Frame, sel: PlaneSel) -> Result<f64> {
    let (s, n) = sse(a, b, sel)?;
    Ok(s as f64 / n as f64)
}

/// PSNR in dB from a mean squared error; zero error maps to `+inf`.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        f64::INFINITY
    } else {
        let max = f64::from(super::MAX_SAMPLE);
        10.0 * (max * max / mse).log10()
    }
}

/// PSNR between two frames over the selected planes. Identical inputs give
/// `f64::INFINITY`; reports substitute [`LOSSLESS_PSNR_DB`].
pub fn psnr(a: &Frame, b: &Frame, sel: PlaneSel) -> Result<f64> {
    mse(a, b, sel).map(psnr_from_mse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::make_tile_grid;

    fn ramp(w: usize, h: usize) -> Frame {
        let mut f = Frame::new(w, h).unwrap();
        f.y = Plane::from_fn(w, h, |x, y| ((x * 7 + y * 3) % 200) as u8);
        f.u = Plane::from_fn(w / 2, h / 2, |x, y| (x * 5 + y) as u8);
        f
    }

    #[test]
    fn identical_is_infinite() {
        let a = ramp(16, 16);
        assert_eq!(psnr(&a, &a, PlaneSel::Y).unwrap(), f64::INFINITY);
    }

    #[test]
    fn unit_offset_luma() {
        let a = ramp(32, 16);
        let mut b = a.clone();
        b.y.data_mut().iter_mut().for_each(|s| *s += 1);
        let expected = 10.0 * (255.0f64 * 255.0).log10();
        assert!((psnr(&a, &b, PlaneSel::Y).unwrap() - 48.1308).abs() < 1e-3);
        assert!((psnr(&a, &b, PlaneSel::Y).unwrap() - expected).abs() < 1e-12);
        assert_eq!(psnr(&a, &b, PlaneSel::U).unwrap(), f64::INFINITY);
    }

    #[test]
    fn single_sample_offset() {
        let a = ramp(16, 8);
        let mut b = a.clone();
        b.y.set(3, 4, a.y.get(3, 4) + 16);
        let n = 16.0 * 8.0;
        // direct sum over all samples
        let direct: f64 = a
            .y
            .data()
            .iter()
            .zip(b.y.data())
            .map(|(&p, &q)| (f64::from(p) - f64::from(q)).powi(2))
            .sum::<f64>()
            / n;
        assert_eq!(direct, 256.0 / n);
        let got = psnr(&a, &b, PlaneSel::Y).unwrap();
        assert!((got - 10.0 * (255.0f64.powi(2) / direct).log10()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_and_mismatch() {
        let a = ramp(16, 16);
        let mut b = a.clone();
        b.y.set(0, 0, 99);
        b.v.set(1, 1, 3);
        assert_eq!(psnr(&a, &b, PlaneSel::All).unwrap(), psnr(&b, &a, PlaneSel::All).unwrap());
        assert!(psnr(&a, &Frame::new(16, 8).unwrap(), PlaneSel::Y).is_err());
    }

    #[test]
    fn tile_sse_sums_to_frame_sse() {
        let a = ramp(416, 240);
        let mut b = a.clone();
        for (i, s) in b.y.data_mut().iter_mut().enumerate() {
            *s = s.wrapping_add((i % 5) as u8);
        }
        b.u.set(150, 100, 0);
        let grid = make_tile_grid(416, 240).unwrap();
        let (mut total, mut count) = (0, 0);
        for t in grid.tiles() {
            let (s, n) = sse_rect(&a, &b, t.core).unwrap();
            total += s;
            count += n;
        }
        assert_eq!((total, count), sse(&a, &b, PlaneSel::All).unwrap());
    }
}
