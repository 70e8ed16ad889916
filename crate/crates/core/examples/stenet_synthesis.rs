//! One pass of the synthesis/enhancement dataflow on a panning texture:
//! the middle frame is synthesized from its neighbours and compared with
//! the real one, and the stage counters show what ran.
//!
//! cargo run --release --example stenet_synthesis

use stenc::frame::{psnr, PlaneSel};
use stenc::stenet::{CallLog, Mode, Stenet};
use stenc::synth::pan_frame;

fn main() -> anyhow::Result<()> {
    let frames: Vec<_> = (0..3).map(|t| pan_frame(176, 144, 8 * t, 0, 3)).collect();
    let stenet = Stenet::default();

    let log = CallLog::new();
    let out = stenet.infer(&frames[0], &frames[2], 2, Mode::Joint, &log)?;
    let syn = out.synthesized().expect("joint output has a synthesized frame");
    println!("synthesized middle frame: {:.2} dB", psnr(&frames[1], syn, PlaneSel::Y)?);
    let (e0, e1) = out.enhanced().expect("joint output has enhanced frames");
    println!(
        "enhanced endpoints: {:.2} dB, {:.2} dB",
        psnr(&frames[0], e0, PlaneSel::Y)?,
        psnr(&frames[2], e1, PlaneSel::Y)?
    );
    for (stage, n) in log.snapshot() {
        println!("  {stage:<14} {n}");
    }

    let split = CallLog::new();
    stenet.infer(&frames[0], &frames[2], 2, Mode::Syn, &split)?;
    stenet.infer(&frames[0], &frames[2], 2, Mode::Enh, &split)?;
    println!("separate passes ran {} inferences, joint ran {}", split.runs(), log.runs());
    Ok(())
}
