use crate::error::{Error, Result};
use crate::frame::{sse_rect, Frame, TileGrid};

/// Per-tile switch: on iff the filtered tile is strictly closer to the
/// original than the reconstruction, measured over all three planes of the
/// tile core.
pub fn decide_flags(orig: &Frame, recon: &Frame, filtered: &Frame, grid: &TileGrid) -> Result<Vec<bool>> {
    grid.tiles()
        .iter()
        .map(|t| {
            let (filtered_sse, _) = sse_rect(orig, filtered, t.core)?;
            let (recon_sse, _) = sse_rect(orig, recon, t.core)?;
            Ok(filtered_sse < recon_sse)
        })
        .collect()
}

/// The reconstruction with the cores of flagged tiles replaced by the
/// filtered frame. Always a fresh frame.
pub fn assemble(recon: &Frame, filtered: &Frame, grid: &TileGrid, flags: &[bool]) -> Result<Frame> {
    if flags.len() != grid.len() {
        return Err(Error::Malformed(format!("{} flags for {} tiles", flags.len(), grid.len())));
    }
    if recon.width() != filtered.width() || recon.height() != filtered.height() {
        return Err(Error::DimensionMismatch("filtered frame size differs from recon".into()));
    }
    let mut out = recon.clone();
    for (t, &on) in grid.tiles().iter().zip(flags) {
        if on {
            out.copy_region(filtered, t.core);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{sse, PlaneSel};
    use crate::synth::textured_frame;
    use proptest::prelude::*;

    fn grid() -> TileGrid {
        TileGrid::with_block(64, 32, 16, 4).unwrap()
    }

    fn perturbed(f: &Frame, seed: u64, amp: i32) -> Frame {
        let mut g = f.clone();
        let mut s = seed | 1;
        for p in g.planes_mut() {
            for v in p.data_mut() {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                let d = (s % (2 * amp as u64 + 1)) as i32 - amp;
                *v = (i32::from(*v) + d).clamp(0, 255) as u8;
            }
        }
        g
    }

    #[test]
    fn ties_keep_recon() {
        let o = textured_frame(64, 32, 1);
        let r = perturbed(&o, 3, 4);
        let flags = decide_flags(&o, &r, &r, &grid()).unwrap();
        assert!(flags.iter().all(|&f| !f));
        let out = assemble(&r, &r, &grid(), &flags).unwrap();
        assert_eq!(out, r);
    }

    #[test]
    fn lossless_recon_never_replaced() {
        let o = textured_frame(64, 32, 1);
        let f = perturbed(&o, 5, 2);
        let flags = decide_flags(&o, &o, &f, &grid()).unwrap();
        assert!(flags.iter().all(|&f| !f));
    }

    #[test]
    fn better_tiles_selected() {
        let o = textured_frame(64, 32, 2);
        let r = perturbed(&o, 7, 6);
        let g = grid();
        let mut f = r.clone();
        // the filter fixes the first tile only
        f.copy_region(&o, g.tiles()[0].core);
        let flags = decide_flags(&o, &r, &f, &g).unwrap();
        assert!(flags[0]);
        assert!(flags[1..].iter().all(|&x| !x));
        let out = assemble(&r, &f, &g, &flags).unwrap();
        assert_eq!(out, f);
    }

    proptest! {
        #[test]
        fn output_never_worse_than_recon(a in 1i32..10, b in 1i32..10, s1 in any::<u64>(), s2 in any::<u64>()) {
            let o = textured_frame(64, 32, 4);
            let r = perturbed(&o, s1, a);
            let f = perturbed(&o, s2, b);
            let g = grid();
            let flags = decide_flags(&o, &r, &f, &g).unwrap();
            let out = assemble(&r, &f, &g, &flags).unwrap();
            let (e_out, _) = sse(&o, &out, PlaneSel::All).unwrap();
            let (e_rec, _) = sse(&o, &r, PlaneSel::All).unwrap();
            let (e_fil, _) = sse(&o, &f, PlaneSel::All).unwrap();
            prop_assert!(e_out <= e_rec);
            prop_assert!(e_out <= e_fil);
        }
    }
}
