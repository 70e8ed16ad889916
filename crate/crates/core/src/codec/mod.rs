//! A small deterministic hybrid codec: hierarchical GOP-8 random access,
//! 16×16 blocks with DC intra, uni- and bi-directional integer-pel motion
//! compensation, 8×8 integer DCT with dead-zone quantization and
//! exp-Golomb coding.

pub mod bits;
mod block;
mod container;
pub mod transform;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use block::{
    decode_frame, encode_frame, peek_header, BlockMode, BlockRecord, DecodedFrame, EncodedFrame, FrameHeader,
};
pub use container::{read_container, write_container, FramePayload, StreamHeader, ToolFlags, MAGIC};

use crate::error::{Error, Result};
use crate::frame::Frame;

pub const GOP: u32 = 8;
pub const BLOCK: usize = 16;
/// Real references per list.
pub const MAX_REFS: usize = 2;
/// Index at which a virtual reference is inserted.
pub const VIRTUAL_INDEX: usize = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodecConfig {
    pub qp: u8,
    pub intra_period: u32,
    pub search_range: usize,
    pub lambda_scale: f64,
    pub fps_num: u32,
    pub fps_den: u32,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            qp: 32,
            intra_period: 32,
            search_range: 16,
            lambda_scale: 0.85,
            fps_num: 30,
            fps_den: 1,
        }
    }
}

impl CodecConfig {
    pub fn with_qp(qp: u8) -> Self {
        Self {
            qp,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qp > 51 {
            return Err(Error::Config(format!("qp {} outside 0..=51", self.qp)));
        }
        if self.intra_period == 0 || !self.intra_period.is_multiple_of(GOP) {
            return Err(Error::Config(format!(
                "intra period {} is not a positive multiple of {GOP}",
                self.intra_period
            )));
        }
        if self.search_range > 256 {
            return Err(Error::Config("search range above 256".into()));
        }
        if self.fps_num == 0 || self.fps_den == 0 {
            return Err(Error::Config("frame rate must be positive".into()));
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_scale * 2f64.powf((f64::from(self.qp) - 12.0) / 3.0)
    }

    pub fn fps(&self) -> f64 {
        f64::from(self.fps_num) / f64::from(self.fps_den)
    }

    pub fn is_intra(&self, poc: u32) -> bool {
        poc.is_multiple_of(self.intra_period)
    }
}

/// Display-order POCs in coding order: POC 0 first, then per GOP [k, k+8]
/// the order k+8, k+4, k+2, k+1, k+3, k+6, k+5, k+7, skipping POCs beyond
/// the sequence.
pub fn coding_order(num_frames: u32) -> Vec<u32> {
    const OFFSETS: [u32; 8] = [8, 4, 2, 1, 3, 6, 5, 7];
    if num_frames == 0 {
        return Vec::new();
    }
    let mut order = vec![0];
    let mut k = 0;
    while k + 1 < num_frames {
        order.extend(OFFSETS.iter().map(|o| k + o).filter(|&p| p < num_frames));
        k += GOP;
    }
    order
}

/// Closed-loop reconstructions by POC.
#[derive(Clone, Debug, Default)]
pub struct Dpb {
    frames: BTreeMap<u32, Arc<Frame>>,
}

impl Dpb {
    /// Bound on stored frames: the GOP being coded plus its base, which is
    /// the last frame of the previous GOP.
    pub const CAPACITY: usize = GOP as usize + 1;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, poc: u32, recon: Arc<Frame>) {
        self.frames.insert(poc, recon);
    }

    pub fn get(&self, poc: u32) -> Option<&Arc<Frame>> {
        self.frames.get(&poc)
    }

    pub fn require(&self, poc: u32) -> Result<&Arc<Frame>> {
        self.get(poc).ok_or(Error::MissingReference(poc))
    }

    pub fn contains(&self, poc: u32) -> bool {
        self.frames.contains_key(&poc)
    }

    pub fn pocs(&self) -> impl DoubleEndedIterator<Item = u32> + '_ {
        self.frames.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Drops everything below `poc`.
    pub fn evict_below(&mut self, poc: u32) {
        self.frames = self.frames.split_off(&poc);
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Arc<Frame>)> {
        self.frames.iter().map(|(&p, f)| (p, f))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "poc", rename_all = "snake_case")]
pub enum RefKind {
    Real(u32),
    /// Synthesized for the frame with this POC.
    Virtual(u32),
}

#[derive(Clone, Debug)]
pub struct RefPicture {
    pub kind: RefKind,
    pub frame: Arc<Frame>,
}

/// RPL0 and RPL1.
#[derive(Clone, Debug, Default)]
pub struct RefLists {
    pub lists: [Vec<RefPicture>; 2],
}

impl RefLists {
    pub fn is_empty(&self) -> bool {
        self.lists.iter().all(Vec::is_empty)
    }

    /// Identities of the entries, list by list.
    pub fn kinds(&self) -> [Vec<RefKind>; 2] {
        [0, 1].map(|l| self.lists[l].iter().map(|r| r.kind).collect())
    }

    /// Puts `frame` at index 1 of both lists. A list that holds a single real
    /// entry grows to two; longer lists push their second entry back.
    pub fn insert_virtual(&mut self, target: u32, frame: Arc<Frame>) -> Result<()> {
        for list in &mut self.lists {
            if list.is_empty() {
                return Err(Error::Precondition(format!(
                    "virtual reference for {target} needs a real entry at index 0"
                )));
            }
            if list.iter().any(|r| matches!(r.kind, RefKind::Virtual(_))) {
                return Err(Error::Precondition("list already holds a virtual reference".into()));
            }
            list.insert(
                VIRTUAL_INDEX,
                RefPicture {
                    kind: RefKind::Virtual(target),
                    frame: Arc::clone(&frame),
                },
            );
        }
        Ok(())
    }
}

/// Nearest-first real references for `poc`: up to two lower POCs in RPL0
/// and up to two higher POCs in RPL1. Intra frames get empty lists.
pub fn derive_rpls(poc: u32, dpb: &Dpb, config: &CodecConfig) -> Result<RefLists> {
    if config.is_intra(poc) {
        return Ok(RefLists::default());
    }
    let below: Vec<u32> = dpb.pocs().filter(|&p| p < poc).rev().take(MAX_REFS).collect();
    let above: Vec<u32> = dpb.pocs().filter(|&p| p > poc).take(MAX_REFS).collect();
    if below.is_empty() && above.is_empty() {
        return Err(Error::MissingReference(poc));
    }
    let entries = |pocs: Vec<u32>| -> Vec<RefPicture> {
        pocs.into_iter()
            .map(|p| RefPicture {
                kind: RefKind::Real(p),
                frame: Arc::clone(dpb.get(p).expect("listed from the dpb")),
            })
            .collect()
    };
    Ok(RefLists {
        lists: [entries(below), entries(above)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dpb_with(pocs: &[u32]) -> Dpb {
        let mut d = Dpb::new();
        for &p in pocs {
            d.insert(p, Arc::new(Frame::new(16, 16).unwrap()));
        }
        d
    }

    fn pocs(l: &RefLists) -> [Vec<RefKind>; 2] {
        l.kinds()
    }

    #[test]
    fn coding_order_examples() {
        assert_eq!(coding_order(9), vec![0, 8, 4, 2, 1, 3, 6, 5, 7]);
        assert_eq!(coding_order(1), vec![0]);
        assert_eq!(coding_order(0), Vec::<u32>::new());
        assert_eq!(
            coding_order(17),
            vec![0, 8, 4, 2, 1, 3, 6, 5, 7, 16, 12, 10, 9, 11, 14, 13, 15]
        );
        assert_eq!(coding_order(7), vec![0, 4, 2, 1, 3, 6, 5]);
    }

    #[test]
    fn coding_order_is_permutation_with_refs_first() {
        let cfg = CodecConfig::default();
        for n in 1..70 {
            let order = coding_order(n);
            let mut sorted = order.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..n).collect::<Vec<_>>());
            let mut dpb = Dpb::new();
            for &p in &order {
                if !cfg.is_intra(p) {
                    let l = derive_rpls(p, &dpb, &cfg).unwrap();
                    assert!(!l.lists[0].is_empty(), "poc {p} lacks a past reference");
                }
                dpb.insert(p, Arc::new(Frame::new(2, 2).unwrap()));
            }
        }
    }

    #[test]
    fn rpl_examples() {
        let cfg = CodecConfig::default();
        let l = derive_rpls(4, &dpb_with(&[0, 8]), &cfg).unwrap();
        assert_eq!(pocs(&l), [vec![RefKind::Real(0)], vec![RefKind::Real(8)]]);
        let l = derive_rpls(1, &dpb_with(&[0, 2, 4, 8]), &cfg).unwrap();
        assert_eq!(
            pocs(&l),
            [vec![RefKind::Real(0)], vec![RefKind::Real(2), RefKind::Real(4)]]
        );
        assert!(derive_rpls(32, &dpb_with(&[24, 40]), &cfg).unwrap().is_empty());
        assert!(matches!(derive_rpls(5, &Dpb::new(), &cfg), Err(Error::MissingReference(5))));
    }

    #[test]
    fn virtual_goes_to_index_one() {
        let cfg = CodecConfig::default();
        let mut l = derive_rpls(4, &dpb_with(&[0, 8]), &cfg).unwrap();
        l.insert_virtual(4, Arc::new(Frame::new(16, 16).unwrap())).unwrap();
        assert_eq!(
            pocs(&l),
            [
                vec![RefKind::Real(0), RefKind::Virtual(4)],
                vec![RefKind::Real(8), RefKind::Virtual(4)]
            ]
        );
        let mut l = derive_rpls(1, &dpb_with(&[0, 2, 4, 8]), &cfg).unwrap();
        l.insert_virtual(1, Arc::new(Frame::new(16, 16).unwrap())).unwrap();
        assert_eq!(l.lists[1].len(), 3);
        assert_eq!(l.lists[1][1].kind, RefKind::Virtual(1));
        assert!(l.insert_virtual(1, Arc::new(Frame::new(16, 16).unwrap())).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(CodecConfig::with_qp(52).validate().is_err());
        let mut c = CodecConfig::default();
        c.intra_period = 12;
        assert!(c.validate().is_err());
        assert!(CodecConfig::with_qp(4).validate().is_ok());
    }
}
