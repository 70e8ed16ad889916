//! The coding loop with synthesis and enhancement woven in. Encoder and
//! decoder run the same loop and differ only in how a frame gets its
//! reconstruction and how a tile's filter switch is obtained.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::plan::{plan_window_with, Step};
use super::{assemble, decide_flags, Action, PfeFlagSection, PurityAudit, StewWindow};
use crate::codec::{
    coding_order, decode_frame, derive_rpls, encode_frame, peek_header, read_container, write_container, BlockRecord,
    CodecConfig, Dpb, FramePayload, RefLists, StreamHeader, ToolFlags, GOP,
};
use crate::error::{Error, Result};
use crate::frame::{make_tile_grid, Frame, TileGrid};
use crate::stenet::{CallLog, Mode, Stenet};

/// Side-specific half of the loop.
pub trait FrameCoder {
    /// Reconstruction of frame `poc` predicted from `lists`.
    fn code(&mut self, poc: u32, lists: &RefLists) -> Result<(Frame, Vec<BlockRecord>)>;

    /// Filter switches for frame `poc`, carried in the payload of `carrier`.
    fn flags(&mut self, carrier: u32, poc: u32, recon: &Frame, filtered: &Frame, grid: &TileGrid) -> Result<Vec<bool>>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActionRecord {
    pub action: Action,
    pub carrier: u32,
    /// (POC, tiles switched on) for each enhanced frame.
    pub enhanced: Vec<(u32, usize)>,
}

#[derive(Clone, Debug)]
pub struct SessionOutput {
    /// Final frames in display order.
    pub outputs: Vec<Frame>,
    /// Closed-loop reconstructions in display order.
    pub recons: Vec<Frame>,
    pub blocks: BTreeMap<u32, Vec<BlockRecord>>,
    pub actions: Vec<ActionRecord>,
    pub audit: PurityAudit,
}

struct Session<'a> {
    config: &'a CodecConfig,
    tools: ToolFlags,
    stenet: &'a Stenet,
    log: &'a CallLog,
    grid: TileGrid,
    dpb: Dpb,
    recons: BTreeMap<u32, Arc<Frame>>,
    blocks: BTreeMap<u32, Vec<BlockRecord>>,
    enhanced: Vec<Arc<Frame>>,
    virtuals: Vec<Arc<Frame>>,
    actions: Vec<ActionRecord>,
    audit: PurityAudit,
}

impl Session<'_> {
    fn code<C: FrameCoder>(
        &mut self,
        coder: &mut C,
        poc: u32,
        pending: &mut Option<(u32, Arc<Frame>)>,
        window: &mut StewWindow,
    ) -> Result<()> {
        let mut lists = derive_rpls(poc, &self.dpb, self.config)?;
        if let Some((target, v)) = pending.take() {
            if target != poc {
                return Err(Error::Precondition(format!(
                    "virtual reference for {target} left over when coding {poc}"
                )));
            }
            lists.insert_virtual(poc, v)?;
        }
        let (recon, blocks) = coder.code(poc, &lists)?;
        let recon = Arc::new(recon.with_poc(poc));
        self.dpb.insert(poc, Arc::clone(&recon));
        if self.dpb.len() > Dpb::CAPACITY {
            return Err(Error::Precondition(format!("DPB holds {} frames", self.dpb.len())));
        }
        self.audit.check_dpb(&self.dpb, &self.virtuals, &self.enhanced);
        if window.contains(poc) {
            window.mark_reconstructed(poc, Arc::clone(&recon))?;
        }
        self.recons.insert(poc, recon);
        self.blocks.insert(poc, blocks);
        Ok(())
    }

    fn act<C: FrameCoder>(
        &mut self,
        coder: &mut C,
        action: Action,
        carrier: u32,
        pending: &mut Option<(u32, Arc<Frame>)>,
        window: &mut StewWindow,
    ) -> Result<()> {
        let (a, b) = action.inputs();
        let fa = Arc::clone(self.dpb.require(a)?);
        let fb = Arc::clone(self.dpb.require(b)?);
        self.audit.check_read(a, &fa, &self.dpb, &self.enhanced);
        self.audit.check_read(b, &fb, &self.dpb, &self.enhanced);
        let mode = match action {
            Action::Synthesize { .. } => Mode::Syn,
            Action::Enhance { .. } => Mode::Enh,
            Action::Joint { .. } => Mode::Joint,
        };
        let out = self.stenet.infer(&fa, &fb, action.gap(), mode, self.log)?;
        if let Some(syn) = out.synthesized() {
            let v = Arc::new(syn.clone());
            self.virtuals.push(Arc::clone(&v));
            *pending = Some((action.target(), v));
        }
        let mut record = ActionRecord {
            action,
            carrier,
            enhanced: Vec::new(),
        };
        if let Some((e0, e1)) = out.enhanced() {
            for (poc, recon, filtered) in [(a, &fa, e0), (b, &fb, e1)] {
                let flags = coder.flags(carrier, poc, recon, filtered, &self.grid)?;
                let o = Arc::new(assemble(recon, filtered, &self.grid, &flags)?.with_poc(poc));
                self.enhanced.push(Arc::clone(&o));
                window.store_enhanced(poc, o)?;
                record.enhanced.push((poc, flags.iter().filter(|&&f| f).count()));
            }
        }
        self.actions.push(record);
        Ok(())
    }
}

fn run<C: FrameCoder>(
    coder: &mut C,
    num_frames: u32,
    width: usize,
    height: usize,
    config: &CodecConfig,
    tools: ToolFlags,
    stenet: &Stenet,
    log: &CallLog,
) -> Result<SessionOutput> {
    if num_frames == 0 {
        return Err(Error::Precondition("empty sequence".into()));
    }
    let mut s = Session {
        config,
        tools,
        stenet,
        log,
        grid: make_tile_grid(width, height)?,
        dpb: Dpb::new(),
        recons: BTreeMap::new(),
        blocks: BTreeMap::new(),
        enhanced: Vec::new(),
        virtuals: Vec::new(),
        actions: Vec::new(),
        audit: PurityAudit::default(),
    };
    let last = num_frames - 1;
    let mut outputs = Vec::with_capacity(num_frames as usize);
    let new_window = |base| -> Result<StewWindow> {
        let w = StewWindow::new(base, last)?;
        Ok(if tools.pfe { w } else { w.without_enhancement() })
    };
    let mut window = new_window(0)?;
    s.code(coder, 0, &mut None, &mut window)?;
    let mut base = 0;
    loop {
        if base > 0 {
            window = new_window(base)?;
            window.mark_reconstructed(base, Arc::clone(s.dpb.require(base)?))?;
        }
        if base < last {
            s.dpb.evict_below(base);
            let mut pending = None;
            for step in plan_window_with(base, last, s.tools) {
                match step {
                    Step::Code(p) => s.code(coder, p, &mut pending, &mut window)?,
                    Step::Act { action, carrier } => s.act(coder, action, carrier, &mut pending, &mut window)?,
                }
            }
            if let Some((t, _)) = pending {
                return Err(Error::Precondition(format!("virtual reference for {t} never used")));
            }
        }
        outputs.extend(window.emit()?.into_iter().map(Arc::unwrap_or_clone));
        base += GOP;
        if base > last {
            break;
        }
    }
    let recons = s.recons.into_values().map(Arc::unwrap_or_clone).collect();
    Ok(SessionOutput {
        outputs,
        recons,
        blocks: s.blocks,
        actions: s.actions,
        audit: s.audit,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EncodeOptions {
    pub config: CodecConfig,
    pub tools: ToolFlags,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self {
            config: CodecConfig::default(),
            tools: ToolFlags::ALL,
        }
    }
}

struct EncoderSide<'a> {
    frames: &'a [Frame],
    config: &'a CodecConfig,
    coded: BTreeMap<u32, Vec<u8>>,
    sections: BTreeMap<u32, Vec<PfeFlagSection>>,
}

impl FrameCoder for EncoderSide<'_> {
    fn code(&mut self, poc: u32, lists: &RefLists) -> Result<(Frame, Vec<BlockRecord>)> {
        let e = encode_frame(&self.frames[poc as usize], poc, lists, self.config)?;
        self.coded.insert(poc, e.data);
        Ok((e.recon, e.blocks))
    }

    fn flags(&mut self, carrier: u32, poc: u32, recon: &Frame, filtered: &Frame, grid: &TileGrid) -> Result<Vec<bool>> {
        let flags = decide_flags(&self.frames[poc as usize], recon, filtered, grid)?;
        self.sections
            .entry(carrier)
            .or_default()
            .push(PfeFlagSection::for_grid(poc, grid, flags.clone())?);
        Ok(flags)
    }
}

#[derive(Clone, Debug)]
pub struct SequenceEncode {
    pub header: StreamHeader,
    pub bitstream: Vec<u8>,
    /// Payload size in bits per POC, flag sections included.
    pub frame_bits: BTreeMap<u32, u64>,
    pub session: SessionOutput,
}

/// Encodes a sequence whose frames are in display order.
pub fn encode_sequence(frames: &[Frame], opts: &EncodeOptions, stenet: &Stenet, log: &CallLog) -> Result<SequenceEncode> {
    opts.config.validate()?;
    let first = frames.first().ok_or_else(|| Error::Precondition("no frames to encode".into()))?;
    let (width, height) = (first.width(), first.height());
    if frames.iter().any(|f| f.width() != width || f.height() != height) {
        return Err(Error::DimensionMismatch("frames differ in size".into()));
    }
    let n = u32::try_from(frames.len()).map_err(|_| Error::Config("too many frames".into()))?;
    let mut side = EncoderSide {
        frames,
        config: &opts.config,
        coded: BTreeMap::new(),
        sections: BTreeMap::new(),
    };
    let session = run(&mut side, n, width, height, &opts.config, opts.tools, stenet, log)?;
    let header = StreamHeader {
        width: width as u32,
        height: height as u32,
        frame_count: n,
        qp: opts.config.qp,
        intra_period: opts.config.intra_period,
        tools: opts.tools,
    };
    let mut payloads = Vec::with_capacity(frames.len());
    let mut frame_bits = BTreeMap::new();
    for poc in coding_order(n) {
        let p = FramePayload {
            coded: side.coded.remove(&poc).expect("every frame coded"),
            sections: side.sections.remove(&poc).unwrap_or_default(),
        };
        frame_bits.insert(poc, 8 * (p.to_bytes()?.len() as u64 + 4));
        payloads.push(p);
    }
    Ok(SequenceEncode {
        header,
        bitstream: write_container(&header, &payloads)?,
        frame_bits,
        session,
    })
}

struct DecoderSide {
    payloads: BTreeMap<u32, FramePayload>,
    next_section: BTreeMap<u32, usize>,
    width: usize,
    height: usize,
}

impl FrameCoder for DecoderSide {
    fn code(&mut self, poc: u32, lists: &RefLists) -> Result<(Frame, Vec<BlockRecord>)> {
        let p = self.payloads.get(&poc).ok_or(Error::MissingReference(poc))?;
        let d = decode_frame(&p.coded, lists, self.width, self.height)?;
        Ok((d.recon, d.blocks))
    }

    fn flags(&mut self, carrier: u32, poc: u32, _recon: &Frame, _filtered: &Frame, grid: &TileGrid) -> Result<Vec<bool>> {
        let p = self
            .payloads
            .get(&carrier)
            .ok_or_else(|| Error::Malformed(format!("no payload for POC {carrier}")))?;
        let i = self.next_section.entry(carrier).or_default();
        let s = p
            .sections
            .get(*i)
            .ok_or_else(|| Error::Malformed(format!("missing flag section for POC {poc} in payload {carrier}")))?;
        if s.poc != poc || !s.matches(grid) {
            return Err(Error::Malformed(format!(
                "flag section for POC {} ({}x{}) where {poc} ({}x{}) was expected",
                s.poc, s.cols, s.rows, grid.cols, grid.rows
            )));
        }
        *i += 1;
        Ok(s.flags.clone())
    }
}

#[derive(Clone, Debug)]
pub struct SequenceDecode {
    pub header: StreamHeader,
    pub session: SessionOutput,
}

/// Decodes a container; tools and coding parameters come from its header.
pub fn decode_sequence(bitstream: &[u8], stenet: &Stenet, log: &CallLog) -> Result<SequenceDecode> {
    decode_sequence_with(bitstream, true, stenet, log)
}

/// As [`decode_sequence`], choosing whether synthesis and enhancement share
/// one inference. The output is the same either way.
pub fn decode_sequence_with(bitstream: &[u8], jise: bool, stenet: &Stenet, log: &CallLog) -> Result<SequenceDecode> {
    let (mut header, payloads) = read_container(bitstream)?;
    header.tools.jise = jise;
    let order = coding_order(header.frame_count);
    let mut by_poc = BTreeMap::new();
    for (want, p) in order.iter().zip(payloads) {
        let h = peek_header(&p.coded)?;
        if h.poc != *want {
            return Err(Error::Malformed(format!("payload for POC {} where {want} was expected", h.poc)));
        }
        by_poc.insert(h.poc, p);
    }
    let mut side = DecoderSide {
        payloads: by_poc,
        next_section: BTreeMap::new(),
        width: header.width as usize,
        height: header.height as usize,
    };
    let config = header.config();
    let session = run(
        &mut side,
        header.frame_count,
        header.width as usize,
        header.height as usize,
        &config,
        header.tools,
        stenet,
        log,
    )?;
    for (poc, p) in &side.payloads {
        if side.next_section.get(poc).copied().unwrap_or(0) != p.sections.len() {
            return Err(Error::Malformed(format!("unused flag sections in payload {poc}")));
        }
    }
    Ok(SequenceDecode { header, session })
}
