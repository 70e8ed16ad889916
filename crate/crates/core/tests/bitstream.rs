use stenc::codec::{read_container, write_container, CodecConfig, ToolFlags};
use stenc::stenet::{CallLog, Stenet};
use stenc::stew::{decode_sequence, encode_sequence, EncodeOptions};
use stenc::synth::pan_sequence;

#[test]
fn all_zero_flags_output_the_reconstructions() {
    let frames = pan_sequence(48, 32, 9, 4, 3);
    let opts = EncodeOptions {
        config: CodecConfig::with_qp(37),
        tools: ToolFlags::ALL,
    };
    let stenet = Stenet::default();
    let enc = encode_sequence(&frames, &opts, &stenet, &CallLog::new()).unwrap();
    let (header, mut payloads) = read_container(&enc.bitstream).unwrap();
    let mut sections = 0;
    for p in &mut payloads {
        for s in &mut p.sections {
            s.flags.iter_mut().for_each(|f| *f = false);
            sections += 1;
        }
    }
    assert!(sections > 0);
    let zeroed = write_container(&header, &payloads).unwrap();
    let dec = decode_sequence(&zeroed, &stenet, &CallLog::new()).unwrap();
    assert_eq!(dec.session.recons, enc.session.recons);
    for (out, rec) in dec.session.outputs.iter().zip(&dec.session.recons) {
        assert!(out.same_samples(rec));
    }
}

#[test]
fn decoded_frames_cover_every_poc() {
    let frames = pan_sequence(48, 32, 13, 4, 3);
    let stenet = Stenet::default();
    let enc = encode_sequence(&frames, &EncodeOptions::default(), &stenet, &CallLog::new()).unwrap();
    let dec = decode_sequence(&enc.bitstream, &stenet, &CallLog::new()).unwrap();
    let pocs: Vec<_> = dec.session.outputs.iter().map(|f| f.poc).collect();
    assert_eq!(pocs, (0..13).map(Some).collect::<Vec<_>>());
}
