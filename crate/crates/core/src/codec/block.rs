//! Per-frame block coding: prediction, residual coding, mode decision and
//! the matching decoder.

use serde::{Deserialize, Serialize};

use super::bits::{BitCounter, BitReader, BitSink, BitWriter};
use super::transform::{self, AREA, MAX_LEVEL, N, ZIGZAG};
use super::{CodecConfig, RefKind, RefLists, BLOCK};
use crate::error::{Error, Result};
use crate::flow::{search_block, MotionVector, PaddedPlane};
use crate::frame::{Frame, Plane, Rect};

const CBLOCK: usize = BLOCK / 2;
const LUMA: usize = BLOCK * BLOCK;
const CHROMA: usize = CBLOCK * CBLOCK;
/// Residual blocks per macroblock: four luma quadrants, then U and V.
const SUBBLOCKS: usize = 6;
const QP_BITS: u32 = 6;
/// Decoded motion vectors beyond this magnitude are rejected.
const MAX_MV: i32 = 1 << 12;
/// Reference margin used by the decoder; anything further out is clamped.
const DECODER_MARGIN: usize = 2 * BLOCK;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BlockMode {
    IntraDc,
    Uni0,
    Uni1,
    Bi,
}

impl BlockMode {
    fn code(self) -> u32 {
        match self {
            BlockMode::Uni0 => 0,
            BlockMode::Uni1 => 1,
            BlockMode::Bi => 2,
            BlockMode::IntraDc => 3,
        }
    }

    fn from_code(c: u32) -> Result<Self> {
        Ok(match c {
            0 => BlockMode::Uni0,
            1 => BlockMode::Uni1,
            2 => BlockMode::Bi,
            3 => BlockMode::IntraDc,
            _ => return Err(Error::Malformed(format!("block mode {c}"))),
        })
    }

    pub fn is_inter(self) -> bool {
        self != BlockMode::IntraDc
    }
}

/// What one block used, as kept in the encoder trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub x: u32,
    pub y: u32,
    pub mode: BlockMode,
    pub refs: Vec<RefKind>,
    pub mvs: Vec<(i32, i32)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameHeader {
    pub poc: u32,
    pub intra: bool,
    pub qp: u8,
}

impl FrameHeader {
    fn write(&self, w: &mut BitWriter) {
        w.put_ue(self.poc);
        w.put_bit(self.intra);
        w.put_bits(u64::from(self.qp), QP_BITS);
    }

    fn read(r: &mut BitReader) -> Result<Self> {
        let poc = r.ue()?;
        let intra = r.bit()?;
        let qp = r.bits(QP_BITS)? as u8;
        if qp > 51 {
            return Err(Error::Malformed(format!("qp {qp}")));
        }
        Ok(Self { poc, intra, qp })
    }
}

/// Reads only the frame header of coded frame data.
pub fn peek_header(data: &[u8]) -> Result<FrameHeader> {
    FrameHeader::read(&mut BitReader::new(data))
}

#[derive(Clone, Debug)]
pub struct EncodedFrame {
    pub header: FrameHeader,
    pub data: Vec<u8>,
    pub recon: Frame,
    pub blocks: Vec<BlockRecord>,
}

#[derive(Clone, Debug)]
pub struct DecodedFrame {
    pub header: FrameHeader,
    pub recon: Frame,
    pub blocks: Vec<BlockRecord>,
}

struct RefPlanes {
    kind: RefKind,
    y: PaddedPlane,
    u: PaddedPlane,
    v: PaddedPlane,
}

fn ref_planes(lists: &RefLists, margin: usize) -> [Vec<RefPlanes>; 2] {
    [0, 1].map(|l| {
        lists.lists[l]
            .iter()
            .map(|r| RefPlanes {
                kind: r.kind,
                y: PaddedPlane::new(&r.frame.y, margin),
                u: PaddedPlane::new(&r.frame.u, margin / 2),
                v: PaddedPlane::new(&r.frame.v, margin / 2),
            })
            .collect()
    })
}

/// Samples of one macroblock: 16×16 luma, 8×8 U and V, row-major.
#[derive(Clone, Copy, PartialEq, Eq)]
struct Samples {
    y: [u8; LUMA],
    u: [u8; CHROMA],
    v: [u8; CHROMA],
}

impl Samples {
    fn gather(planes: &[Plane; 3], bx: usize, by: usize) -> Self {
        let mut s = Samples {
            y: [0; LUMA],
            u: [0; CHROMA],
            v: [0; CHROMA],
        };
        for r in 0..BLOCK {
            s.y[r * BLOCK..(r + 1) * BLOCK].copy_from_slice(&planes[0].row(by + r)[bx..bx + BLOCK]);
        }
        let (cx, cy) = (bx / 2, by / 2);
        for r in 0..CBLOCK {
            s.u[r * CBLOCK..(r + 1) * CBLOCK].copy_from_slice(&planes[1].row(cy + r)[cx..cx + CBLOCK]);
            s.v[r * CBLOCK..(r + 1) * CBLOCK].copy_from_slice(&planes[2].row(cy + r)[cx..cx + CBLOCK]);
        }
        s
    }

    fn scatter(&self, planes: &mut [Plane; 3], bx: usize, by: usize) {
        let w = planes[0].width();
        for r in 0..BLOCK {
            let d = (by + r) * w + bx;
            planes[0].data_mut()[d..d + BLOCK].copy_from_slice(&self.y[r * BLOCK..(r + 1) * BLOCK]);
        }
        let cw = planes[1].width();
        let (cx, cy) = (bx / 2, by / 2);
        for (p, src) in [(1, &self.u), (2, &self.v)] {
            for r in 0..CBLOCK {
                let d = (cy + r) * cw + cx;
                planes[p].data_mut()[d..d + CBLOCK].copy_from_slice(&src[r * CBLOCK..(r + 1) * CBLOCK]);
            }
        }
    }

    fn ssd(&self, other: &Samples) -> u64 {
        let d = |a: &[u8], b: &[u8]| -> u64 {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let e = u64::from(x.abs_diff(y));
                    e * e
                })
                .sum()
        };
        d(&self.y, &other.y) + d(&self.u, &other.u) + d(&self.v, &other.v)
    }

    /// Rounded average, halves rounding up.
    fn average(a: &Samples, b: &Samples) -> Samples {
        let avg = |x: u8, y: u8| ((u16::from(x) + u16::from(y) + 1) >> 1) as u8;
        Samples {
            y: std::array::from_fn(|i| avg(a.y[i], b.y[i])),
            u: std::array::from_fn(|i| avg(a.u[i], b.u[i])),
            v: std::array::from_fn(|i| avg(a.v[i], b.v[i])),
        }
    }
}

/// Integer-pel luma prediction; chroma uses half the vector, averaging the
/// neighbouring samples when a component is odd.
fn motion_compensate(r: &RefPlanes, bx: usize, by: usize, mv: MotionVector) -> Samples {
    let mut s = Samples {
        y: [0; LUMA],
        u: [0; CHROMA],
        v: [0; CHROMA],
    };
    let (x0, y0) = (bx as i64 + i64::from(mv.dx), by as i64 + i64::from(mv.dy));
    if r.y.covers(x0, y0, BLOCK, BLOCK) {
        for row in 0..BLOCK {
            s.y[row * BLOCK..(row + 1) * BLOCK].copy_from_slice(r.y.row_at(x0, y0 + row as i64, BLOCK));
        }
    } else {
        for row in 0..BLOCK {
            for col in 0..BLOCK {
                s.y[row * BLOCK + col] = r.y.get(x0 + col as i64, y0 + row as i64);
            }
        }
    }
    let cx = (bx / 2) as i64 + i64::from(mv.dx >> 1);
    let cy = (by / 2) as i64 + i64::from(mv.dy >> 1);
    let (fx, fy) = (i64::from(mv.dx & 1), i64::from(mv.dy & 1));
    for (plane, out) in [(&r.u, &mut s.u), (&r.v, &mut s.v)] {
        for row in 0..CBLOCK {
            for col in 0..CBLOCK {
                let (x, y) = (cx + col as i64, cy + row as i64);
                let a = i64::from(plane.get(x, y));
                let b = i64::from(plane.get(x + fx, y));
                let c = i64::from(plane.get(x, y + fy));
                let d = i64::from(plane.get(x + fx, y + fy));
                out[row * CBLOCK + col] = ((a + b + c + d + 2) >> 2) as u8;
            }
        }
    }
    s
}

fn dc_value(p: &Plane, x0: usize, y0: usize, n: usize) -> u8 {
    let mut sum = 0u32;
    let mut count = 0u32;
    if y0 > 0 {
        sum += p.row(y0 - 1)[x0..x0 + n].iter().map(|&v| u32::from(v)).sum::<u32>();
        count += n as u32;
    }
    if x0 > 0 {
        sum += (0..n).map(|r| u32::from(p.get(x0 - 1, y0 + r))).sum::<u32>();
        count += n as u32;
    }
    if count == 0 {
        128
    } else {
        ((sum + count / 2) / count) as u8
    }
}

fn intra_dc(recon: &[Plane; 3], bx: usize, by: usize) -> Samples {
    Samples {
        y: [dc_value(&recon[0], bx, by, BLOCK); LUMA],
        u: [dc_value(&recon[1], bx / 2, by / 2, CBLOCK); CHROMA],
        v: [dc_value(&recon[2], bx / 2, by / 2, CBLOCK); CHROMA],
    }
}

type Levels = [[i32; AREA]; SUBBLOCKS];

/// Reads or writes the 8×8 sub-block `k` of a macroblock as a flat array.
fn sub_block(s: &Samples, k: usize) -> [u8; AREA] {
    match k {
        0..=3 => {
            let (ox, oy) = ((k % 2) * N, (k / 2) * N);
            std::array::from_fn(|i| s.y[(oy + i / N) * BLOCK + ox + i % N])
        }
        4 => s.u,
        _ => s.v,
    }
}

fn set_sub_block(s: &mut Samples, k: usize, v: &[u8; AREA]) {
    match k {
        0..=3 => {
            let (ox, oy) = ((k % 2) * N, (k / 2) * N);
            for i in 0..AREA {
                s.y[(oy + i / N) * BLOCK + ox + i % N] = v[i];
            }
        }
        4 => s.u = *v,
        _ => s.v = *v,
    }
}

fn reconstruct(pred: &Samples, levels: &Levels, qp: u8) -> Samples {
    let mut out = *pred;
    for (k, lv) in levels.iter().enumerate() {
        if lv.iter().all(|&l| l == 0) {
            continue;
        }
        let coef: [i32; AREA] = std::array::from_fn(|i| transform::dequantize(lv[i], qp));
        let res = transform::inverse(&coef);
        let p = sub_block(pred, k);
        let rec: [u8; AREA] = std::array::from_fn(|i| (i32::from(p[i]) + res[i]).clamp(0, 255) as u8);
        set_sub_block(&mut out, k, &rec);
    }
    out
}

fn quantize_residual(orig: &Samples, pred: &Samples, qp: u8) -> Levels {
    std::array::from_fn(|k| {
        let (o, p) = (sub_block(orig, k), sub_block(pred, k));
        let res: [i32; AREA] = std::array::from_fn(|i| i32::from(o[i]) - i32::from(p[i]));
        if res.iter().all(|&r| r == 0) {
            return [0; AREA];
        }
        let coef = transform::forward(&res);
        std::array::from_fn(|i| transform::quantize(coef[i], qp))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Choice {
    Intra,
    Uni {
        list: usize,
        idx: usize,
        mv: MotionVector,
    },
    Bi {
        idx: [usize; 2],
        mv: [MotionVector; 2],
    },
}

impl Choice {
    fn mode(&self) -> BlockMode {
        match self {
            Choice::Intra => BlockMode::IntraDc,
            Choice::Uni { list: 0, .. } => BlockMode::Uni0,
            Choice::Uni { .. } => BlockMode::Uni1,
            Choice::Bi { .. } => BlockMode::Bi,
        }
    }

    /// (list, index, vector) for every list the block predicts from.
    fn uses(&self) -> Vec<(usize, usize, MotionVector)> {
        match *self {
            Choice::Intra => Vec::new(),
            Choice::Uni { list, idx, mv } => vec![(list, idx, mv)],
            Choice::Bi { idx, mv } => vec![(0, idx[0], mv[0]), (1, idx[1], mv[1])],
        }
    }
}

fn write_levels<S: BitSink>(s: &mut S, lv: &[i32; AREA]) {
    let nnz = lv.iter().filter(|&&l| l != 0).count();
    s.put_ue(nnz as u32);
    let mut run = 0u32;
    for &pos in &ZIGZAG {
        let l = lv[pos];
        if l == 0 {
            run += 1;
        } else {
            s.put_ue(run);
            s.put_se(l);
            run = 0;
        }
    }
}

fn read_levels(r: &mut BitReader) -> Result<[i32; AREA]> {
    let mut lv = [0; AREA];
    let nnz = r.ue()? as usize;
    if nnz > AREA {
        return Err(Error::Malformed(format!("{nnz} coefficients in an 8x8 block")));
    }
    let mut pos = 0usize;
    for _ in 0..nnz {
        pos += r.ue()? as usize;
        if pos >= AREA {
            return Err(Error::Malformed("coefficient run past block end".into()));
        }
        let l = r.se()?;
        if l == 0 || l.abs() > MAX_LEVEL {
            return Err(Error::Malformed(format!("coefficient level {l}")));
        }
        lv[ZIGZAG[pos]] = l;
        pos += 1;
    }
    Ok(lv)
}

/// Reference index as truncated unary over the list length: one bit picks
/// the first entry, a list of one costs nothing.
fn write_ref_idx<S: BitSink>(s: &mut S, idx: usize, len: usize) {
    for _ in 0..idx {
        s.put_bit(true);
    }
    if idx + 1 < len {
        s.put_bit(false);
    }
}

fn read_ref_idx(r: &mut BitReader, len: usize) -> Result<usize> {
    let mut idx = 0;
    while idx + 1 < len && r.bit()? {
        idx += 1;
    }
    Ok(idx)
}

/// Motion vector predictors: the last vector coded in the current block row
/// for the same list and reference index.
struct MvPredictor {
    last: [Vec<MotionVector>; 2],
}

impl MvPredictor {
    fn new(refs: &[Vec<RefPlanes>; 2]) -> Self {
        Self {
            last: [vec![MotionVector::ZERO; refs[0].len()], vec![MotionVector::ZERO; refs[1].len()]],
        }
    }

    fn get(&self, list: usize, idx: usize) -> MotionVector {
        self.last[list][idx]
    }

    fn update(&mut self, choice: &Choice) {
        for (list, idx, mv) in choice.uses() {
            self.last[list][idx] = mv;
        }
    }
}

fn write_block<S: BitSink>(
    s: &mut S,
    intra_frame: bool,
    choice: &Choice,
    mvp: &MvPredictor,
    levels: &Levels,
) {
    if !intra_frame {
        s.put_ue(choice.mode().code());
    }
    for (list, idx, mv) in choice.uses() {
        write_ref_idx(s, idx, mvp.last[list].len());
        let p = mvp.get(list, idx);
        s.put_se(mv.dx - p.dx);
        s.put_se(mv.dy - p.dy);
    }
    for lv in levels {
        write_levels(s, lv);
    }
}

fn padded_size(width: usize, height: usize) -> (usize, usize) {
    (width.next_multiple_of(BLOCK), height.next_multiple_of(BLOCK))
}

fn blank_recon(w16: usize, h16: usize) -> [Plane; 3] {
    [
        Plane::new(w16, h16, 0),
        Plane::new(w16 / 2, h16 / 2, 0),
        Plane::new(w16 / 2, h16 / 2, 0),
    ]
}

fn crop_recon(recon: [Plane; 3], width: usize, height: usize, poc: u32) -> Result<Frame> {
    let r = Rect::new(0, 0, width, height);
    let [y, u, v] = recon;
    Ok(Frame::from_planes(y.crop(r), u.crop(r.half()), v.crop(r.half()))?.with_poc(poc))
}

fn check_refs(lists: &RefLists, width: usize, height: usize) -> Result<()> {
    for r in lists.lists.iter().flatten() {
        if r.frame.width() != width || r.frame.height() != height {
            return Err(Error::DimensionMismatch(format!(
                "reference {:?} is {}x{}, frame is {width}x{height}",
                r.kind,
                r.frame.width(),
                r.frame.height()
            )));
        }
    }
    Ok(())
}

fn record(bx: usize, by: usize, choice: &Choice, refs: &[Vec<RefPlanes>; 2]) -> BlockRecord {
    let uses = choice.uses();
    BlockRecord {
        x: bx as u32,
        y: by as u32,
        mode: choice.mode(),
        refs: uses.iter().map(|&(l, i, _)| refs[l][i].kind).collect(),
        mvs: uses.iter().map(|&(_, _, mv)| (mv.dx, mv.dy)).collect(),
    }
}

/// Encodes `orig` as frame `poc`. Every 16×16 block is trial-coded as DC
/// intra, as uni-prediction from each list entry and as bi-prediction from
/// the best-matching entry of each list; the lowest SSD + λ·bits wins, ties
/// going to the earlier candidate.
pub fn encode_frame(orig: &Frame, poc: u32, lists: &RefLists, config: &CodecConfig) -> Result<EncodedFrame> {
    config.validate()?;
    let intra = config.is_intra(poc);
    if !intra && lists.is_empty() {
        return Err(Error::MissingReference(poc));
    }
    let (width, height) = (orig.width(), orig.height());
    check_refs(lists, width, height)?;
    let (w16, h16) = padded_size(width, height);
    let cur = [
        orig.y.extend_to(w16, h16),
        orig.u.extend_to(w16 / 2, h16 / 2),
        orig.v.extend_to(w16 / 2, h16 / 2),
    ];
    let refs = if intra {
        [Vec::new(), Vec::new()]
    } else {
        ref_planes(lists, config.search_range + 2 * BLOCK)
    };
    let header = FrameHeader {
        poc,
        intra,
        qp: config.qp,
    };
    let mut w = BitWriter::new();
    header.write(&mut w);
    let lambda = config.lambda();
    let mut recon = blank_recon(w16, h16);
    let mut blocks = Vec::with_capacity((w16 / BLOCK) * (h16 / BLOCK));

    for by in (0..h16).step_by(BLOCK) {
        let mut mvp = MvPredictor::new(&refs);
        for bx in (0..w16).step_by(BLOCK) {
            let o = Samples::gather(&cur, bx, by);
            let mut cands = vec![(Choice::Intra, intra_dc(&recon, bx, by))];
            let mut best: [Option<(usize, u32)>; 2] = [None, None];
            let mut uni_start = [0usize; 2];
            for (list, entries) in refs.iter().enumerate() {
                uni_start[list] = cands.len();
                for (idx, r) in entries.iter().enumerate() {
                    let (mv, sad) = search_block(&r.y, &cur[0], bx, by, BLOCK, BLOCK, config.search_range);
                    cands.push((Choice::Uni { list, idx, mv }, motion_compensate(r, bx, by, mv)));
                    if best[list].is_none_or(|(_, s)| sad < s) {
                        best[list] = Some((idx, sad));
                    }
                }
            }
            if let (Some((i0, _)), Some((i1, _))) = (best[0], best[1]) {
                let (c0, p0) = cands[uni_start[0] + i0];
                let (c1, p1) = cands[uni_start[1] + i1];
                let mv = |c: Choice| match c {
                    Choice::Uni { mv, .. } => mv,
                    _ => unreachable!("uni candidate"),
                };
                cands.push((
                    Choice::Bi {
                        idx: [i0, i1],
                        mv: [mv(c0), mv(c1)],
                    },
                    Samples::average(&p0, &p1),
                ));
            }

            let mut chosen: Option<(f64, Choice, Levels, Samples)> = None;
            for (choice, pred) in &cands {
                let levels = quantize_residual(&o, pred, config.qp);
                let rec = reconstruct(pred, &levels, config.qp);
                let mut counter = BitCounter::default();
                write_block(&mut counter, intra, choice, &mvp, &levels);
                let cost = rec.ssd(&o) as f64 + lambda * counter.bits as f64;
                if chosen.as_ref().is_none_or(|c| cost < c.0) {
                    chosen = Some((cost, *choice, levels, rec));
                }
            }
            let (_, choice, levels, rec) = chosen.expect("intra is always a candidate");
            write_block(&mut w, intra, &choice, &mvp, &levels);
            mvp.update(&choice);
            rec.scatter(&mut recon, bx, by);
            blocks.push(record(bx, by, &choice, &refs));
        }
    }
    Ok(EncodedFrame {
        header,
        data: w.finish(),
        recon: crop_recon(recon, width, height, poc)?,
        blocks,
    })
}

/// Decodes one frame of `width`×`height` against the same lists the encoder
/// used.
pub fn decode_frame(data: &[u8], lists: &RefLists, width: usize, height: usize) -> Result<DecodedFrame> {
    let mut r = BitReader::new(data);
    let header = FrameHeader::read(&mut r)?;
    if !header.intra && lists.is_empty() {
        return Err(Error::MissingReference(header.poc));
    }
    crate::frame::check_dims(width, height)?;
    check_refs(lists, width, height)?;
    let (w16, h16) = padded_size(width, height);
    let refs = if header.intra {
        [Vec::new(), Vec::new()]
    } else {
        ref_planes(lists, DECODER_MARGIN)
    };
    let mut recon = blank_recon(w16, h16);
    let mut blocks = Vec::with_capacity((w16 / BLOCK) * (h16 / BLOCK));

    for by in (0..h16).step_by(BLOCK) {
        let mut mvp = MvPredictor::new(&refs);
        for bx in (0..w16).step_by(BLOCK) {
            let mode = if header.intra {
                BlockMode::IntraDc
            } else {
                BlockMode::from_code(r.ue()?)?
            };
            let lists_used: &[usize] = match mode {
                BlockMode::IntraDc => &[],
                BlockMode::Uni0 => &[0],
                BlockMode::Uni1 => &[1],
                BlockMode::Bi => &[0, 1],
            };
            let mut used = Vec::with_capacity(2);
            for &list in lists_used {
                if refs[list].is_empty() {
                    return Err(Error::RefIndex { index: 0, len: 0 });
                }
                let idx = read_ref_idx(&mut r, refs[list].len())?;
                let p = mvp.get(list, idx);
                let dx = i64::from(p.dx) + i64::from(r.se()?);
                let dy = i64::from(p.dy) + i64::from(r.se()?);
                if dx.abs() > i64::from(MAX_MV) || dy.abs() > i64::from(MAX_MV) {
                    return Err(Error::Malformed(format!("motion vector ({dx}, {dy})")));
                }
                let mv = MotionVector::new(dx as i32, dy as i32);
                used.push((list, idx, mv));
            }
            let choice = match used.as_slice() {
                [] => Choice::Intra,
                &[(list, idx, mv)] => Choice::Uni { list, idx, mv },
                &[(_, i0, m0), (_, i1, m1)] => Choice::Bi {
                    idx: [i0, i1],
                    mv: [m0, m1],
                },
                _ => unreachable!("at most two lists"),
            };
            mvp.update(&choice);
            let pred = match choice {
                Choice::Intra => intra_dc(&recon, bx, by),
                Choice::Uni { list, idx, mv } => motion_compensate(&refs[list][idx], bx, by, mv),
                Choice::Bi { idx, mv } => Samples::average(
                    &motion_compensate(&refs[0][idx[0]], bx, by, mv[0]),
                    &motion_compensate(&refs[1][idx[1]], bx, by, mv[1]),
                ),
            };
            let mut levels = [[0; AREA]; SUBBLOCKS];
            for lv in &mut levels {
                *lv = read_levels(&mut r)?;
            }
            reconstruct(&pred, &levels, header.qp).scatter(&mut recon, bx, by);
            blocks.push(record(bx, by, &choice, &refs));
        }
    }
    Ok(DecodedFrame {
        header,
        recon: crop_recon(recon, width, height, header.poc)?,
        blocks,
    })
}

#[cfg(test)]
mod tests;
