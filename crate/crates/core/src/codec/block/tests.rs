use std::sync::Arc;

use super::*;
use crate::codec::{RefPicture, RefLists};
use crate::synth::{pan_frame, textured_frame};

fn noise_frame(w: usize, h: usize, seed: u64) -> Frame {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 24) as u8
    };
    let y = Plane::from_fn(w, h, |_, _| next());
    let u = Plane::from_fn(w / 2, h / 2, |_, _| next());
    let v = Plane::from_fn(w / 2, h / 2, |_, _| next());
    Frame::from_planes(y, u, v).unwrap()
}

fn lists(l0: &[(u32, &Frame)], l1: &[(u32, &Frame)]) -> RefLists {
    let conv = |v: &[(u32, &Frame)]| {
        v.iter()
            .map(|&(p, f)| RefPicture {
                kind: RefKind::Real(p),
                frame: Arc::new(f.clone()),
            })
            .collect()
    };
    RefLists {
        lists: [conv(l0), conv(l1)],
    }
}

fn config(qp: u8) -> CodecConfig {
    CodecConfig {
        search_range: 8,
        ..CodecConfig::with_qp(qp)
    }
}

#[test]
fn closed_loop_on_noise() {
    for qp in [27, 37] {
        let cfg = config(qp);
        let (w, h) = (40, 24);
        let f0 = noise_frame(w, h, 1);
        let f1 = noise_frame(w, h, 2);
        let f2 = noise_frame(w, h, 3);
        let e0 = encode_frame(&f0, 0, &RefLists::default(), &cfg).unwrap();
        let d0 = decode_frame(&e0.data, &RefLists::default(), w, h).unwrap();
        assert_eq!(d0.recon, e0.recon);
        assert_eq!(d0.blocks, e0.blocks);
        let e2 = encode_frame(&f2, 2, &lists(&[(0, &e0.recon)], &[]), &cfg).unwrap();
        let l = lists(&[(0, &e0.recon)], &[(2, &e2.recon)]);
        let e1 = encode_frame(&f1, 1, &l, &cfg).unwrap();
        let d1 = decode_frame(&e1.data, &l, w, h).unwrap();
        assert_eq!(d1.recon, e1.recon);
        assert_eq!(d1.header.poc, 1);
        assert_eq!(e1.recon.poc, Some(1));
    }
}

#[test]
fn closed_loop_textured_motion() {
    let cfg = config(32);
    let (w, h) = (64, 48);
    let f: Vec<Frame> = (0..3).map(|t| pan_frame(w, h, 3 * t, t, 4)).collect();
    let e0 = encode_frame(&f[0], 0, &RefLists::default(), &cfg).unwrap();
    let e2 = encode_frame(&f[2], 2, &lists(&[(0, &e0.recon)], &[]), &cfg).unwrap();
    let l = lists(&[(0, &e0.recon)], &[(2, &e2.recon)]);
    let e1 = encode_frame(&f[1], 1, &l, &cfg).unwrap();
    assert!(e1.blocks.iter().any(|b| b.mode == BlockMode::Bi));
    let d1 = decode_frame(&e1.data, &l, w, h).unwrap();
    assert_eq!(d1.recon, e1.recon);
    assert_eq!(d1.blocks, e1.blocks);
}

#[test]
fn identical_reference_gives_zero_mv_zero_residual() {
    let f = textured_frame(48, 32, 6);
    let l = lists(&[(0, &f)], &[]);
    let e = encode_frame(&f, 1, &l, &config(27)).unwrap();
    for b in &e.blocks {
        assert_eq!(b.mode, BlockMode::Uni0);
        assert_eq!(b.mvs, vec![(0, 0)]);
        assert_eq!(b.refs, vec![RefKind::Real(0)]);
    }
    assert!(e.recon.same_samples(&f));
    // header: ue(1) + 1 + 6 bits; per block: mode, 2 mvd, 6 nnz = 9 bits
    // (a one-entry list needs no index bits)
    let bits = 3 + 1 + 6 + 9 * e.blocks.len();
    assert_eq!(e.data.len(), bits.div_ceil(8));
}

#[test]
fn flat_intra_frame_is_cheap() {
    let f = Frame::filled(64, 48, 100, 90).unwrap();
    let e = encode_frame(&f, 0, &RefLists::default(), &config(22)).unwrap();
    assert!(e.blocks.iter().all(|b| b.mode == BlockMode::IntraDc));
    assert!(e.recon.same_samples(&f));
    let first = {
        let mut c = BitCounter::default();
        let o = Samples::gather(&[f.y.clone(), f.u.clone(), f.v.clone()], 0, 0);
        let pred = intra_dc(&blank_recon(64, 48), 0, 0);
        let mvp = MvPredictor::new(&[Vec::new(), Vec::new()]);
        write_block(&mut c, true, &Choice::Intra, &mvp, &quantize_residual(&o, &pred, 22));
        c.bits as usize
    };
    // every later block predicts exactly and spends one bit per sub-block
    let bits = 1 + 1 + 6 + first + 6 * (e.blocks.len() - 1);
    assert_eq!(e.data.len(), bits.div_ceil(8));
}

fn handmade(poc: u32, blocks: usize, mode: u32, ref_bits: &[bool], first_mv: (i32, i32)) -> Vec<u8> {
    let mut w = BitWriter::new();
    FrameHeader {
        poc,
        intra: false,
        qp: 30,
    }
    .write(&mut w);
    for i in 0..blocks {
        w.put_ue(mode);
        for &b in ref_bits {
            w.put_bit(b);
        }
        let mvd = if i == 0 { first_mv } else { (0, 0) };
        w.put_se(mvd.0);
        w.put_se(mvd.1);
        for _ in 0..SUBBLOCKS {
            w.put_ue(0);
        }
    }
    w.finish()
}

#[test]
fn zero_residual_block_equals_prediction() {
    let r = textured_frame(16, 16, 9);
    let l = lists(&[(0, &r)], &[]);
    let data = handmade(1, 1, 0, &[], (3, -2));
    let d = decode_frame(&data, &l, 16, 16).unwrap();
    for y in 0..16 {
        for x in 0..16 {
            assert_eq!(d.recon.y.get(x, y), r.y.get_clamped(x as i64 + 3, y as i64 - 2));
        }
    }
    // chroma: half-sample average at (1.5, -1)
    for y in 0..8i64 {
        for x in 0..8i64 {
            let a = u32::from(r.u.get_clamped(x + 1, y - 1));
            let b = u32::from(r.u.get_clamped(x + 2, y - 1));
            assert_eq!(u32::from(d.recon.u.get(x as usize, y as usize)), (2 * a + 2 * b + 2) >> 2);
        }
    }
}

#[test]
fn ref_index_bits_pick_the_entry() {
    let a = textured_frame(16, 16, 9);
    let b = textured_frame(16, 16, 10);
    let l = lists(&[(0, &a), (2, &b)], &[]);
    for (bits, want) in [(&[false][..], &a), (&[true][..], &b)] {
        let d = decode_frame(&handmade(3, 1, 0, bits, (0, 0)), &l, 16, 16).unwrap();
        assert!(d.recon.same_samples(want));
    }
}

#[test]
fn empty_list_reference_is_an_error() {
    let r = textured_frame(16, 16, 9);
    let l = lists(&[(0, &r)], &[]);
    let data = handmade(1, 1, 1, &[], (0, 0));
    assert!(matches!(
        decode_frame(&data, &l, 16, 16),
        Err(Error::RefIndex { index: 0, len: 0 })
    ));
}

#[test]
fn truncated_frames_are_errors() {
    let f = noise_frame(32, 32, 5);
    let e = encode_frame(&f, 0, &RefLists::default(), &config(30)).unwrap();
    for n in 0..e.data.len() - 1 {
        assert!(decode_frame(&e.data[..n], &RefLists::default(), 32, 32).is_err(), "{n}");
    }
}

#[test]
fn inter_frame_without_references_fails() {
    let f = textured_frame(16, 16, 1);
    assert!(matches!(
        encode_frame(&f, 3, &RefLists::default(), &config(30)),
        Err(Error::MissingReference(3))
    ));
}

#[test]
fn odd_sizes_are_padded_internally() {
    let cfg = config(27);
    let f0 = pan_frame(42, 26, 0, 0, 2);
    let f1 = pan_frame(42, 26, 2, 0, 2);
    let e0 = encode_frame(&f0, 0, &RefLists::default(), &cfg).unwrap();
    let l = lists(&[(0, &e0.recon)], &[]);
    let e1 = encode_frame(&f1, 1, &l, &cfg).unwrap();
    assert_eq!((e1.recon.width(), e1.recon.height()), (42, 26));
    assert_eq!(decode_frame(&e1.data, &l, 42, 26).unwrap().recon, e1.recon);
}

#[test]
fn rate_falls_with_qp() {
    let (w, h) = (48, 32);
    let f0 = pan_frame(w, h, 0, 0, 3);
    let f1 = pan_frame(w, h, 4, 1, 3);
    let mut last = usize::MAX;
    for qp in [22, 27, 32, 37, 42] {
        let cfg = config(qp);
        let e0 = encode_frame(&f0, 0, &RefLists::default(), &cfg).unwrap();
        let e1 = encode_frame(&f1, 1, &lists(&[(0, &e0.recon)], &[]), &cfg).unwrap();
        let total = e0.data.len() + e1.data.len();
        assert!(total <= last, "qp {qp}: {total} > {last}");
        last = total;
    }
}

#[test]
fn deterministic_bytes() {
    let f = noise_frame(32, 16, 8);
    let a = encode_frame(&f, 0, &RefLists::default(), &config(33)).unwrap();
    let b = encode_frame(&f, 0, &RefLists::default(), &config(33)).unwrap();
    assert_eq!(a.data, b.data);
}

#[test]
fn bi_average_rounds_half_up() {
    let mk = |v: u8| Samples {
        y: [v; LUMA],
        u: [v; CHROMA],
        v: [v; CHROMA],
    };
    let s = Samples::average(&mk(3), &mk(4));
    assert_eq!(s.y[0], 4);
    assert_eq!(Samples::average(&mk(255), &mk(254)).u[5], 255);
}
