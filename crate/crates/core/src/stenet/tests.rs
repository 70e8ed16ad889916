use super::*;
use crate::flow::FlowTag;
use crate::frame::{psnr, PlaneSel, Rect};
use crate::synth::{pan_frame, textured_frame};

fn mc() -> McFuse {
    McFuse::default()
}

#[test]
fn blend_equal_confidence_is_midpoint() {
    let ops = McFuse {
        residual_scale: f32::INFINITY,
    };
    let mut own = vec![Channel::filled(2, 2, 10.0); 6];
    own.push(Channel::filled(2, 2, 1.0));
    let mut inc = vec![Channel::filled(2, 2, 20.0); 6];
    inc.push(Channel::filled(2, 2, 1.0));
    let out = ops.blend(&own, &inc);
    for k in 0..6 {
        assert!(out[k].data.iter().all(|&v| v == 15.0));
    }
    assert!(out[6].data.iter().all(|&v| v == 2.0));
}

#[test]
fn zero_placeholder_leaves_state_unchanged() {
    let f = textured_frame(16, 16, 3);
    let p: Tensor = pack_six_channel(&f).unwrap().into();
    let zero = Tensor::zeros(7, 8, 8);
    let ops = mc();
    let e = ops.refine_backward(&ops.extract(&Tensor::concat(&[&p, &zero])));
    assert_eq!(e.len(), 7);
    assert_eq!(&e.channels[..6], &p.channels[..]);
    assert!(e.channels[6].data.iter().all(|&c| c == 1.0));
}

#[test]
fn mismatched_incoming_is_ignored() {
    let mut own = vec![Channel::filled(1, 1, 0.0); 6];
    own.push(Channel::filled(1, 1, 1.0));
    let mut inc = vec![Channel::filled(1, 1, 100.0); 6];
    inc.push(Channel::filled(1, 1, 5.0));
    let out = mc().blend(&own, &inc);
    assert_eq!(out, own);
}

#[test]
fn untrusted_state_takes_incoming() {
    let mut own = vec![Channel::filled(1, 1, 0.0); 6];
    own.push(Channel::filled(1, 1, 0.0));
    let mut inc = vec![Channel::filled(1, 1, 100.0); 6];
    inc.push(Channel::filled(1, 1, 2.0));
    let out = mc().blend(&own, &inc);
    assert_eq!(out, inc);
}

#[test]
fn align_drops_confidence_outside_and_on_poor_matches() {
    let mut ch = vec![Channel::filled(4, 2, 50.0); 6];
    ch.push(Channel::filled(4, 2, 1.0));
    let t = Tensor::from_channels(ch).unwrap();
    let mut flow = FlowField::constant(4, 2, 2.0, 0.0, FlowTag::TTo1);
    flow.residual[1] = 4.0;
    flow.residual[4] = 40.0;
    let a = mc().align(&t, &flow).unwrap();
    // columns 2 and 3 read from x = 4 and 5, outside the tensor
    assert_eq!(a.channels[6].data, vec![1.0, 0.75, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    assert!(a.channels[0].data.iter().all(|&v| v == 50.0));
}

#[test]
fn static_scene_reproduced_exactly() {
    let f = textured_frame(48, 32, 5).with_poc(0);
    let g = f.clone().with_poc(2);
    let log = CallLog::new();
    let out = run(&f, &g, Mode::Joint, &mc(), 8, &log).unwrap();
    let StenetOutput::Joint { e0, syn, e1 } = out else {
        panic!("joint output expected")
    };
    assert!(syn.same_samples(&f));
    assert!(e0.same_samples(&f));
    assert!(e1.same_samples(&f));
    assert_eq!((e0.poc, e1.poc, syn.poc), (Some(0), Some(2), None));
}

#[test]
fn swapping_static_inputs_gives_same_synthesis() {
    let f = textured_frame(32, 32, 11);
    let log = CallLog::new();
    let a = run(&f, &f, Mode::Syn, &mc(), 4, &log).unwrap();
    let b = run(&f, &f, Mode::Syn, &mc(), 4, &log).unwrap();
    assert_eq!(a, b);
}

#[test]
fn joint_matches_separate_pipelines() {
    let i0 = pan_frame(64, 32, 0, 0, 8);
    let i1 = pan_frame(64, 32, 6, 2, 8);
    let log = CallLog::new();
    let joint = run(&i0, &i1, Mode::Joint, &mc(), 8, &log).unwrap();
    let enh = run(&i0, &i1, Mode::Enh, &mc(), 8, &log).unwrap();
    let syn = run(&i0, &i1, Mode::Syn, &mc(), 8, &log).unwrap();
    assert_eq!(joint.enhanced(), enh.enhanced());
    assert_eq!(joint.synthesized(), syn.synthesized());
}

#[test]
fn joint_runs_shared_stages_once() {
    let i0 = pan_frame(32, 32, 0, 0, 1);
    let i1 = pan_frame(32, 32, 4, 0, 1);
    let joint = CallLog::new();
    run(&i0, &i1, Mode::Joint, &mc(), 8, &joint).unwrap();
    for s in Stage::ALL {
        assert_eq!(joint.count(s), 1, "{}", s.name());
    }

    let split = CallLog::new();
    run(&i0, &i1, Mode::Enh, &mc(), 8, &split).unwrap();
    run(&i0, &i1, Mode::Syn, &mc(), 8, &split).unwrap();
    let want = [
        ("theta", 2),
        ("phi", 2),
        ("eq4", 2),
        ("eq5", 2),
        ("eq6", 1),
        ("eq7", 2),
        ("eq8", 2),
        ("eq9", 1),
        ("reconstruct_0", 1),
        ("reconstruct_t", 1),
        ("reconstruct_1", 1),
    ];
    let snap = split.snapshot();
    for (name, n) in want {
        assert_eq!(snap[name], n, "{name}");
    }
}

#[test]
fn enh_skips_synthesis_states() {
    let f = textured_frame(16, 16, 2);
    let log = CallLog::with_trace();
    run(&f, &f, Mode::Enh, &mc(), 2, &log).unwrap();
    assert_eq!(log.count(Stage::Eq6), 0);
    assert_eq!(log.count(Stage::Eq9), 0);
    assert_eq!(log.count(Stage::ReconstructT), 0);
    let trace = log.trace();
    assert_eq!(trace.first().map(|r| r.stage), Some("theta"));
    assert!(trace.iter().filter(|r| r.stage.starts_with("eq")).all(|r| r.channels == 7 && r.width == 8));
}

#[test]
fn translated_triplet_midpoint() {
    let (w, h) = (96, 64);
    let i0 = pan_frame(w, h, 0, 0, 21);
    let mid = pan_frame(w, h, 4, 0, 21);
    let i1 = pan_frame(w, h, 8, 0, 21);
    let log = CallLog::new();
    let out = run(&i0, &i1, Mode::Syn, &mc(), 16, &log).unwrap();
    let syn = out.synthesized().unwrap();
    let r = Rect::new(8, 8, w - 16, h - 16);
    let db = psnr(&syn.crop(r), &mid.crop(r), PlaneSel::Y).unwrap();
    assert!(db >= 40.0, "interior PSNR {db}");
}

#[test]
fn odd_luma_shift_stays_on_grid() {
    // one luma sample per POC is half a sample in the packed domain
    let (w, h) = (96, 64);
    let i0 = pan_frame(w, h, 0, 0, 22);
    let mid = pan_frame(w, h, 3, 0, 22);
    let i1 = pan_frame(w, h, 6, 0, 22);
    let out = run(&i0, &i1, Mode::Syn, &mc(), 16, &CallLog::new()).unwrap();
    let r = Rect::new(8, 8, w - 16, h - 16);
    assert!(out.synthesized().unwrap().crop(r).y == mid.crop(r).y);
}

struct WrongShape;

impl OperatorSet for WrongShape {
    fn state_channels(&self) -> usize {
        7
    }
    fn extract(&self, input: &Tensor) -> Tensor {
        input.clone()
    }
    fn refine_backward(&self, input: &Tensor) -> Tensor {
        Tensor::zeros(3, input.width, input.height)
    }
    fn refine_forward(&self, input: &Tensor) -> Tensor {
        input.clone()
    }
    fn reconstruct(&self, state: &Tensor) -> Tensor {
        state.clone()
    }
}

#[test]
fn bad_operator_shape_is_reported() {
    let f = textured_frame(16, 16, 2);
    let err = run(&f, &f, Mode::Enh, &WrongShape, 2, &CallLog::new()).unwrap_err();
    assert!(matches!(err, Error::OperatorShape(_)), "{err}");
}

#[test]
fn mismatched_inputs_rejected() {
    let a = textured_frame(16, 16, 2);
    let b = textured_frame(32, 16, 2);
    assert!(matches!(
        run(&a, &b, Mode::Syn, &mc(), 2, &CallLog::new()),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn tiled_run_stitches_cores() {
    let f = textured_frame(64, 48, 13);
    let grid = TileGrid::with_block(64, 48, 32, 8).unwrap();
    let log = CallLog::new();
    let out = run_tiled(&f, &f, Mode::Joint, &mc(), 4, &grid, &log).unwrap();
    assert_eq!(log.runs(), grid.len() as u64);
    let (e0, e1) = out.enhanced().unwrap();
    assert!(e0.same_samples(&f) && e1.same_samples(&f));
    assert!(out.synthesized().unwrap().same_samples(&f));
}

#[test]
fn search_range_grows_with_gap() {
    let s = FlowSearch::default();
    assert_eq!(s.range_for_gap(1), 10);
    assert_eq!(s.range_for_gap(4), 40);
    assert_eq!(s.range_for_gap(8), 64);
}
