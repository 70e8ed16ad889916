//! Rate-distortion evaluation: sequence reports, BD-rate between curves and
//! statistics on how often synthesized references were picked.

mod bd;
mod report;
mod usage;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use bd::{bd_rate, bd_rate_component, BDResult, ComponentBd, Pchip, RDCurve, RDPoint, MIN_CURVE_POINTS};
pub use report::{sequence_report, FrameRow, SequenceReport};
pub use usage::{ref_usage, ref_usage_by_frame, RefUsageStats};

use crate::error::Result;

/// One row of an RD points CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdRow {
    pub qp: u8,
    pub rate_kbps: f64,
    pub psnr_y: f64,
    pub psnr_u: f64,
    pub psnr_v: f64,
}

impl RdRow {
    pub fn point(&self) -> RDPoint {
        RDPoint {
            rate_kbps: self.rate_kbps,
            psnr_y: self.psnr_y,
            psnr_u: self.psnr_u,
            psnr_v: self.psnr_v,
        }
    }
}

/// Reads `qp,rate_kbps,psnr_y,psnr_u,psnr_v` with a header line.
pub fn read_rd_csv(r: impl Read) -> Result<Vec<RdRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let rows = rd.deserialize().collect::<std::result::Result<Vec<RdRow>, _>>()?;
    Ok(rows)
}

pub fn write_rd_csv(w: impl Write, rows: &[RdRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn curve_from_rows(rows: &[RdRow]) -> Result<RDCurve> {
    RDCurve::new(rows.iter().map(RdRow::point).collect())
}

/// Per-frame reference usage as
/// `poc,inter_blocks,both_virtual,one_virtual,none`.
pub fn write_ref_usage_csv(w: impl Write, per_frame: &BTreeMap<u32, RefUsageStats>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["poc", "inter_blocks", "both_virtual", "one_virtual", "none"])?;
    for (poc, s) in per_frame {
        wr.write_record(
            [*poc as u64, s.inter_blocks, s.both_virtual, s.one_virtual, s.none].map(|v| v.to_string()),
        )?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rd_csv_roundtrip() {
        let rows = vec![
            RdRow {
                qp: 22,
                rate_kbps: 812.5,
                psnr_y: 40.25,
                psnr_u: 42.0,
                psnr_v: 43.5,
            },
            RdRow {
                qp: 27,
                rate_kbps: 400.0,
                psnr_y: 37.0,
                psnr_u: 40.0,
                psnr_v: 41.0,
            },
        ];
        let mut buf = Vec::new();
        write_rd_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("qp,rate_kbps,psnr_y,psnr_u,psnr_v\n"));
        assert_eq!(read_rd_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn bad_csv_is_an_error() {
        assert!(read_rd_csv("qp,rate_kbps\n22,abc\n".as_bytes()).is_err());
    }

    #[test]
    fn usage_csv_layout() {
        let mut m = BTreeMap::new();
        m.insert(
            3,
            RefUsageStats {
                inter_blocks: 4,
                both_virtual: 1,
                one_virtual: 2,
                none: 1,
            },
        );
        let mut buf = Vec::new();
        write_ref_usage_csv(&mut buf, &m).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "poc,inter_blocks,both_virtual,one_virtual,none\n3,4,1,2,1\n"
        );
    }
}
