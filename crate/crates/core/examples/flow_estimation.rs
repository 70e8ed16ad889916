//! Block matching on a translated texture, the intermediate flows derived
//! from it and a warp that pulls one frame onto the other.
//!
//! cargo run --example flow_estimation

use stenc::flow::{block_match, estimate_intermediate_flows, reuse_flows, Warp};
use stenc::frame::{psnr, PlaneSel};
use stenc::synth::pan_frame;

fn main() -> anyhow::Result<()> {
    let i0 = pan_frame(96, 64, 0, 0, 7);
    let i1 = pan_frame(96, 64, 6, 2, 7);

    let motion = block_match(&i0, &i1, 8, 16)?;
    println!("block vector at the centre of frame 1: {:?}", motion.at(48, 32));

    let (t0, t1) = estimate_intermediate_flows(&i0, &i1, 8)?;
    println!("F(t->0) {:?}  F(t->1) {:?}", t0.at(48, 32), t1.at(48, 32));
    let (f01, f10) = reuse_flows(&t0, &t1)?;
    println!("F(0->1) {:?}  F(1->0) {:?}", f01.at(48, 32), f10.at(48, 32));

    let pulled = i0.warp(&motion)?;
    println!(
        "frame 0 warped onto frame 1: {:.2} dB (unwarped {:.2} dB)",
        psnr(&i1, &pulled, PlaneSel::Y)?,
        psnr(&i1, &i0, PlaneSel::Y)?
    );
    Ok(())
}
