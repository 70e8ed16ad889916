//! Per-tile post-filter switching: the encoder keeps the filtered tile
//! only where it is closer to the original, and the decision travels as a
//! small bit-packed section.
//!
//! cargo run --example pfe_flags

use stenc::frame::{mse, Frame, PlaneSel, TileGrid};
use stenc::stew::{assemble, decide_flags, PfeFlagSection};
use stenc::synth::textured_frame;

fn main() -> anyhow::Result<()> {
    let orig = textured_frame(128, 64, 9);
    let grid = TileGrid::with_block(128, 64, 32, 4)?;

    // a "reconstruction" with a flat bias and a "filter" that removes it on
    // the left half only
    let biased = |f: &Frame, x_end: usize| {
        let mut g = f.clone();
        for y in 0..64 {
            for x in 0..x_end {
                g.y.set(x, y, f.y.get(x, y).saturating_add(6));
            }
        }
        g
    };
    let recon = biased(&orig, 128);
    let filtered = {
        let mut g = biased(&orig, 128);
        g.copy_region(&orig, stenc::frame::Rect::new(0, 0, 64, 64));
        g
    };

    let flags = decide_flags(&orig, &recon, &filtered, &grid)?;
    let out = assemble(&recon, &filtered, &grid, &flags)?;
    let section = PfeFlagSection::for_grid(3, &grid, flags.clone())?;
    println!("flags: {flags:?}");
    println!("section bytes: {:02x?}", section.to_bytes());
    println!(
        "MSE recon {:.2}, filtered {:.2}, switched {:.2}",
        mse(&orig, &recon, PlaneSel::All)?,
        mse(&orig, &filtered, PlaneSel::All)?,
        mse(&orig, &out, PlaneSel::All)?
    );
    Ok(())
}
