//! Tool-off comparison on a synthetic pan: RD curves with and without
//! reference synthesis, their BD-rate, and how often inter blocks picked a
//! synthesized reference.
//!
//! cargo run --release --example ablation [frames]

use stenc::codec::{CodecConfig, ToolFlags};
use stenc::eval::{bd_rate, ref_usage_by_frame, sequence_report, RDCurve};
use stenc::stenet::{CallLog, Stenet};
use stenc::stew::{encode_sequence, EncodeOptions};
use stenc::synth::pan_sequence;

const QPS: [u8; 5] = [22, 27, 32, 37, 42];

fn main() -> anyhow::Result<()> {
    let n = std::env::args().nth(1).map_or(Ok(65), |s| s.parse())?;
    let frames = pan_sequence(176, 144, n, 8, 11);
    let stenet = Stenet::default();
    let rfs_only = ToolFlags {
        rfs: true,
        pfe: false,
        jise: false,
    };
    let mut curves = Vec::new();
    for tools in [ToolFlags::NONE, rfs_only, ToolFlags::ALL] {
        let mut points = Vec::new();
        for qp in QPS {
            let opts = EncodeOptions {
                config: CodecConfig::with_qp(qp),
                tools,
            };
            let enc = encode_sequence(&frames, &opts, &stenet, &CallLog::new())?;
            let rep = sequence_report(&frames, &enc.session.outputs, 8 * enc.bitstream.len() as u64, 30.0)?;
            let (_, usage) = ref_usage_by_frame(&enc.session.blocks)?;
            let virt = usage.fractions().map_or(0.0, |f| f[0] + f[1]);
            println!(
                "rfs={:<5} pfe={:<5} qp {qp}: {:9.2} kbps  Y {:.3} dB  virtual refs in {:5.1}% of inter blocks",
                tools.rfs,
                tools.pfe,
                rep.rate_kbps,
                rep.psnr[0],
                100.0 * virt
            );
            points.push(rep.rd_point()?);
        }
        curves.push(RDCurve::new(points)?);
    }
    let rfs = bd_rate(&curves[0], &curves[1])?;
    let all = bd_rate(&curves[0], &curves[2])?;
    println!("BD-rate Y, RFS only vs plain codec:  {:+.2}%", rfs.y.bd_rate_percent);
    println!("BD-rate Y, all tools vs plain codec: {:+.2}%", all.y.bd_rate_percent);
    Ok(())
}
