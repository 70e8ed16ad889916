//! The plain codec on its own: encode a short pan with every tool off,
//! decode it, and check the decoder reproduces the encoder's frames.
//!
//! cargo run --release --example minicodec_roundtrip [qp]

use stenc::codec::{coding_order, CodecConfig, ToolFlags};
use stenc::eval::sequence_report;
use stenc::stenet::{CallLog, Stenet};
use stenc::stew::{decode_sequence, encode_sequence, EncodeOptions};
use stenc::synth::pan_sequence;

fn main() -> anyhow::Result<()> {
    let qp = std::env::args().nth(1).map_or(Ok(32), |s| s.parse())?;
    let frames = pan_sequence(128, 96, 17, 4, 5);
    println!("coding order: {:?}", coding_order(frames.len() as u32));

    let opts = EncodeOptions {
        config: CodecConfig::with_qp(qp),
        tools: ToolFlags::NONE,
    };
    let stenet = Stenet::default();
    let enc = encode_sequence(&frames, &opts, &stenet, &CallLog::new())?;
    let dec = decode_sequence(&enc.bitstream, &stenet, &CallLog::new())?;
    assert_eq!(dec.session.recons, enc.session.recons, "decoder drifted");

    let rep = sequence_report(&frames, &dec.session.outputs, 8 * enc.bitstream.len() as u64, 30.0)?;
    println!(
        "qp {qp}: {} bytes, {:.2} kbps, PSNR Y/U/V {:.2}/{:.2}/{:.2} dB",
        enc.bitstream.len(),
        rep.rate_kbps,
        rep.psnr[0],
        rep.psnr[1],
        rep.psnr[2]
    );
    for (poc, bits) in &enc.frame_bits {
        println!("  POC {poc:2}: {bits:6} bits");
    }
    Ok(())
}
