//! Bidirectional recurrent space-time enhancement dataflow.
//!
//! Two input frames are packed to six half-resolution channels and pushed
//! through a backward branch (succeeding → preceding and intermediate
//! states) and a forward branch (preceding → succeeding and intermediate
//! states). The enhancement pipeline yields both inputs enhanced, the
//! synthesis pipeline yields the frame halfway between them, and the joint
//! mode yields all three while running every shared stage once.
//!
//! The learned modules are abstracted behind [`OperatorSet`];
//! [`McFuse`] is a deterministic motion-compensated fusion stand-in.

mod calllog;
mod mcfuse;

use serde::Serialize;

pub use calllog::{CallLog, Stage, StageRecord};
pub use mcfuse::McFuse;

use crate::error::{Error, Result};
use crate::flow::{downsample_flow, estimate_intermediate_flows, reuse_flows, FlowField, Warp};
use crate::frame::{
    make_tile_grid, pack_six_channel, unpack_six_channel, Channel, Frame, PackedFrame, TileGrid, PACKED_CHANNELS,
};

/// A stack of equally sized half-resolution channels.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub width: usize,
    pub height: usize,
    pub channels: Vec<Channel>,
}

impl Tensor {
    pub fn zeros(channels: usize, width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            channels: vec![Channel::zeros(width, height); channels],
        }
    }

    pub fn from_channels(channels: Vec<Channel>) -> Result<Self> {
        let (width, height) = channels
            .first()
            .map(|c| (c.width, c.height))
            .ok_or_else(|| Error::OperatorShape("empty tensor".into()))?;
        if channels.iter().any(|c| c.width != width || c.height != height) {
            return Err(Error::OperatorShape("channels differ in size".into()));
        }
        Ok(Self {
            width,
            height,
            channels,
        })
    }

    /// Channel concatenation.
    pub fn concat(parts: &[&Tensor]) -> Tensor {
        let (width, height) = (parts[0].width, parts[0].height);
        debug_assert!(parts.iter().all(|p| p.width == width && p.height == height));
        Tensor {
            width,
            height,
            channels: parts.iter().flat_map(|p| p.channels.iter().cloned()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }
}

impl From<PackedFrame> for Tensor {
    fn from(p: PackedFrame) -> Self {
        Tensor {
            width: p.width2,
            height: p.height2,
            channels: p.channels,
        }
    }
}

impl Warp for Tensor {
    fn warp(&self, flow: &FlowField) -> Result<Self> {
        let channels = self.channels.iter().map(|c| c.warp(flow)).collect::<Result<_>>()?;
        Ok(Tensor {
            width: self.width,
            height: self.height,
            channels,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum StateId {
    E0B,
    E1B,
    StB,
    E0F,
    E1F,
    StF,
}

/// One of the six named recurrent states.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureState {
    pub id: StateId,
    pub tensor: Tensor,
}

impl Warp for FeatureState {
    fn warp(&self, flow: &FlowField) -> Result<Self> {
        Ok(FeatureState {
            id: self.id,
            tensor: self.tensor.warp(flow)?,
        })
    }
}

/// The pluggable modules of the dataflow. Every operator must be a pure
/// function of its input.
pub trait OperatorSet: Send + Sync {
    /// Channel count of every named state.
    fn state_channels(&self) -> usize;

    /// Weight-shared feature extraction of the backward branch. Input is the
    /// packed frame concatenated with an aligned state (or zeros).
    fn extract(&self, input: &Tensor) -> Tensor;

    /// Residual refinement of the backward branch.
    fn refine_backward(&self, input: &Tensor) -> Tensor;

    /// Residual refinement of the forward branch. Input is a backward state
    /// concatenated with further channels (packed frame, aligned state or
    /// zeros).
    fn refine_forward(&self, input: &Tensor) -> Tensor;

    /// Weight-shared reconstruction layer producing six packed channels.
    fn reconstruct(&self, state: &Tensor) -> Tensor;

    /// Aligns a state along a flow before it is fused elsewhere. Plain
    /// backward warping unless the operators track where samples came from.
    fn align(&self, state: &Tensor, flow: &FlowField) -> Result<Tensor> {
        state.warp(flow)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    /// Enhancement pipeline: both inputs enhanced.
    Enh,
    /// Synthesis pipeline: the intermediate frame.
    Syn,
    /// Both pipelines in one pass.
    Joint,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StenetOutput {
    Enh { e0: Frame, e1: Frame },
    Syn { syn: Frame },
    Joint { e0: Frame, syn: Frame, e1: Frame },
}

impl StenetOutput {
    pub fn enhanced(&self) -> Option<(&Frame, &Frame)> {
        match self {
            StenetOutput::Enh { e0, e1 } | StenetOutput::Joint { e0, e1, .. } => Some((e0, e1)),
            StenetOutput::Syn { .. } => None,
        }
    }

    pub fn synthesized(&self) -> Option<&Frame> {
        match self {
            StenetOutput::Syn { syn } | StenetOutput::Joint { syn, .. } => Some(syn),
            StenetOutput::Enh { .. } => None,
        }
    }
}

struct Shapes {
    width2: usize,
    height2: usize,
    channels: usize,
}

impl Shapes {
    fn state(&self, id: StateId, tensor: Tensor, log: &CallLog, stage: Stage) -> Result<FeatureState> {
        if tensor.len() != self.channels || tensor.width != self.width2 || tensor.height != self.height2 {
            return Err(Error::OperatorShape(format!(
                "{id:?}: expected {}x{}x{}, got {}x{}x{}",
                self.channels,
                self.width2,
                self.height2,
                tensor.len(),
                tensor.width,
                tensor.height
            )));
        }
        log.record(stage, &tensor);
        Ok(FeatureState { id, tensor })
    }

    fn spatial(&self, what: &str, tensor: Tensor) -> Result<Tensor> {
        if tensor.width != self.width2 || tensor.height != self.height2 || tensor.is_empty() {
            return Err(Error::OperatorShape(format!(
                "{what}: expected {}x{}, got {}x{}",
                self.width2, self.height2, tensor.width, tensor.height
            )));
        }
        Ok(tensor)
    }

    fn frame(&self, ops: &dyn OperatorSet, state: &FeatureState, log: &CallLog, stage: Stage) -> Result<Frame> {
        let t = self.spatial("reconstruct", ops.reconstruct(&state.tensor))?;
        if t.len() != PACKED_CHANNELS {
            return Err(Error::OperatorShape(format!(
                "reconstruct must emit {PACKED_CHANNELS} channels, got {}",
                t.len()
            )));
        }
        log.record(stage, &t);
        Ok(unpack_six_channel(&PackedFrame::new(t.channels)?))
    }
}

/// Runs the dataflow on whole frames. `search_range` bounds the integer
/// motion search behind the flow estimator.
pub fn run(
    i0: &Frame,
    i1: &Frame,
    mode: Mode,
    ops: &dyn OperatorSet,
    search_range: usize,
    log: &CallLog,
) -> Result<StenetOutput> {
    if i0.width() != i1.width() || i0.height() != i1.height() {
        return Err(Error::DimensionMismatch(format!(
            "stenet inputs {}x{} vs {}x{}",
            i0.width(),
            i0.height(),
            i1.width(),
            i1.height()
        )));
    }
    log.begin_run();

    let (t_to_0, t_to_1) = estimate_intermediate_flows(i0, i1, search_range)?;
    log.record_flow(Stage::Theta, &t_to_0);
    let (f01, f10) = reuse_flows(&t_to_0, &t_to_1)?;
    log.record_flow(Stage::Phi, &f01);
    let t_to_0 = downsample_flow(&t_to_0)?;
    let t_to_1 = downsample_flow(&t_to_1)?;
    let f01 = downsample_flow(&f01)?;
    let f10 = downsample_flow(&f10)?;

    let p0: Tensor = pack_six_channel(i0)?.into();
    let p1: Tensor = pack_six_channel(i1)?.into();
    let shapes = Shapes {
        width2: p0.width,
        height2: p0.height,
        channels: ops.state_channels(),
    };
    let zero = Tensor::zeros(shapes.channels, shapes.width2, shapes.height2);
    let synth = mode != Mode::Enh;

    // backward branch
    let lifted = shapes.spatial("extract", ops.extract(&Tensor::concat(&[&p1, &zero])))?;
    let e1b = shapes.state(StateId::E1B, ops.refine_backward(&lifted), log, Stage::Eq4)?;
    let aligned = ops.align(&e1b.tensor, &f01)?;
    let lifted = shapes.spatial("extract", ops.extract(&Tensor::concat(&[&p0, &aligned])))?;
    let e0b = shapes.state(StateId::E0B, ops.refine_backward(&lifted), log, Stage::Eq5)?;
    let stb = if synth {
        let aligned = ops.align(&e1b.tensor, &t_to_1)?;
        Some(shapes.state(StateId::StB, ops.refine_backward(&aligned), log, Stage::Eq6)?)
    } else {
        None
    };

    // forward branch
    let e0f = shapes.state(
        StateId::E0F,
        ops.refine_forward(&Tensor::concat(&[&e0b.tensor, &p0, &zero])),
        log,
        Stage::Eq7,
    )?;
    let aligned = ops.align(&e0f.tensor, &f10)?;
    let e1f = shapes.state(
        StateId::E1F,
        ops.refine_forward(&Tensor::concat(&[&e1b.tensor, &aligned])),
        log,
        Stage::Eq8,
    )?;
    let stf = match &stb {
        Some(stb) => {
            let aligned = ops.align(&e0f.tensor, &t_to_0)?;
            Some(shapes.state(
                StateId::StF,
                ops.refine_forward(&Tensor::concat(&[&stb.tensor, &aligned])),
                log,
                Stage::Eq9,
            )?)
        }
        None => None,
    };

    let endpoints = |log: &CallLog| -> Result<(Frame, Frame)> {
        let mut e0 = shapes.frame(ops, &e0f, log, Stage::Reconstruct0)?;
        let mut e1 = shapes.frame(ops, &e1f, log, Stage::Reconstruct1)?;
        e0.poc = i0.poc;
        e1.poc = i1.poc;
        Ok((e0, e1))
    };
    Ok(match (mode, stf) {
        (Mode::Enh, _) => {
            let (e0, e1) = endpoints(log)?;
            StenetOutput::Enh { e0, e1 }
        }
        (Mode::Syn, Some(stf)) => StenetOutput::Syn {
            syn: shapes.frame(ops, &stf, log, Stage::ReconstructT)?,
        },
        (Mode::Joint, Some(stf)) => {
            let (e0, e1) = endpoints(log)?;
            let syn = shapes.frame(ops, &stf, log, Stage::ReconstructT)?;
            StenetOutput::Joint { e0, syn, e1 }
        }
        _ => unreachable!("synthesis state exists for Syn and Joint"),
    })
}

/// Block-based inference: each tile's padded rectangle goes through
/// [`run`] on its own and only the core region is kept. Stage counts in
/// `log` are per tile.
pub fn run_tiled(
    i0: &Frame,
    i1: &Frame,
    mode: Mode,
    ops: &dyn OperatorSet,
    search_range: usize,
    grid: &TileGrid,
    log: &CallLog,
) -> Result<StenetOutput> {
    if grid.width != i0.width() || grid.height != i0.height() {
        return Err(Error::DimensionMismatch("tile grid does not match the inputs".into()));
    }
    if let [only] = grid.tiles() {
        if only.padded.w == grid.width && only.padded.h == grid.height {
            return run(i0, i1, mode, ops, search_range, log);
        }
    }
    let blank = || {
        let mut f = Frame::new(i0.width(), i0.height()).expect("validated dimensions");
        f.poc = None;
        f
    };
    let (mut e0, mut syn, mut e1) = (blank(), blank(), blank());
    for tile in grid.tiles() {
        let out = run(&i0.crop(tile.padded), &i1.crop(tile.padded), mode, ops, search_range, log)?;
        if let Some((a, b)) = out.enhanced() {
            e0.blit_core(a, tile);
            e1.blit_core(b, tile);
        }
        if let Some(s) = out.synthesized() {
            syn.blit_core(s, tile);
        }
    }
    e0.poc = i0.poc;
    e1.poc = i1.poc;
    Ok(match mode {
        Mode::Enh => StenetOutput::Enh { e0, e1 },
        Mode::Syn => StenetOutput::Syn { syn },
        Mode::Joint => StenetOutput::Joint { e0, syn, e1 },
    })
}

/// How far the flow estimator searches, as a function of the POC gap
/// between the two inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FlowSearch {
    pub range_per_poc: usize,
    pub max_range: usize,
}

impl Default for FlowSearch {
    fn default() -> Self {
        Self {
            range_per_poc: 10,
            max_range: 64,
        }
    }
}

impl FlowSearch {
    pub fn range_for_gap(&self, gap: u32) -> usize {
        (self.range_per_poc * gap.max(1) as usize).min(self.max_range)
    }
}

/// An operator set together with its flow-search policy; runs tiled
/// inference with the tile grid for the frame size.
pub struct Stenet {
    ops: Box<dyn OperatorSet>,
    pub flow: FlowSearch,
}

impl Default for Stenet {
    fn default() -> Self {
        Self::new(Box::new(McFuse::default()), FlowSearch::default())
    }
}

impl Stenet {
    pub fn new(ops: Box<dyn OperatorSet>, flow: FlowSearch) -> Self {
        Self { ops, flow }
    }

    pub fn ops(&self) -> &dyn OperatorSet {
        self.ops.as_ref()
    }

    /// Runs on two frames `gap` POCs apart.
    pub fn infer(&self, i0: &Frame, i1: &Frame, gap: u32, mode: Mode, log: &CallLog) -> Result<StenetOutput> {
        let grid = make_tile_grid(i0.width(), i0.height())?;
        run_tiled(i0, i1, mode, self.ops(), self.flow.range_for_gap(gap), &grid, log)
    }
}

#[cfg(test)]
mod tests;
