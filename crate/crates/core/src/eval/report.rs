use serde::Serialize;

use super::RDPoint;
use crate::error::{Error, Result};
use crate::frame::{mse, psnr_from_mse, Frame, PlaneSel, LOSSLESS_PSNR_DB};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameRow {
    pub poc: u32,
    pub mse: [f64; 3],
    /// `LOSSLESS_PSNR_DB` for an exact component.
    pub psnr: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceReport {
    pub frames: usize,
    pub total_bits: u64,
    pub rate_kbps: f64,
    /// PSNR of the mean MSE per component, with the lossless sentinel.
    pub psnr: [f64; 3],
    pub lossless: [bool; 3],
    pub per_frame: Vec<FrameRow>,
}

impl SequenceReport {
    /// The report as a curve point. Lossless components have no finite PSNR
    /// and cannot be fitted.
    pub fn rd_point(&self) -> Result<RDPoint> {
        if self.lossless.iter().any(|&l| l) {
            return Err(Error::Curve("lossless sequence has no finite PSNR".into()));
        }
        Ok(RDPoint {
            rate_kbps: self.rate_kbps,
            psnr_y: self.psnr[0],
            psnr_u: self.psnr[1],
            psnr_v: self.psnr[2],
        })
    }
}

fn report_psnr(m: f64) -> f64 {
    let p = psnr_from_mse(m);
    if p.is_finite() {
        p
    } else {
        LOSSLESS_PSNR_DB
    }
}

/// Per-frame and sequence quality plus the bitrate.
pub fn sequence_report(orig: &[Frame], out: &[Frame], total_bits: u64, fps: f64) -> Result<SequenceReport> {
    if orig.len() != out.len() {
        return Err(Error::DimensionMismatch(format!("{} original vs {} output frames", orig.len(), out.len())));
    }
    if orig.is_empty() {
        return Err(Error::Precondition("no frames to report".into()));
    }
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::Config(format!("fps {fps}")));
    }
    let mut per_frame = Vec::with_capacity(orig.len());
    let mut sums = [0.0f64; 3];
    for (i, (a, b)) in orig.iter().zip(out).enumerate() {
        let mut m = [0.0; 3];
        for (c, sel) in PlaneSel::COMPONENTS.into_iter().enumerate() {
            m[c] = mse(a, b, sel)?;
            sums[c] += m[c];
        }
        per_frame.push(FrameRow {
            poc: i as u32,
            mse: m,
            psnr: m.map(report_psnr),
        });
    }
    let n = orig.len() as f64;
    let means = sums.map(|s| s / n);
    Ok(SequenceReport {
        frames: orig.len(),
        total_bits,
        rate_kbps: total_bits as f64 * fps / n / 1000.0,
        psnr: means.map(report_psnr),
        lossless: means.map(|m| m == 0.0),
        per_frame,
    })
}
