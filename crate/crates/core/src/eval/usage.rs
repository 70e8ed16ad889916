use std::collections::BTreeMap;

use serde::Serialize;

use crate::codec::{BlockMode, BlockRecord, RefKind};
use crate::error::{Error, Result};

/// How inter blocks chose between real and synthesized references.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RefUsageStats {
    pub inter_blocks: u64,
    pub both_virtual: u64,
    pub one_virtual: u64,
    pub none: u64,
}

impl RefUsageStats {
    /// `[both_virtual, one_virtual, none]` as fractions of inter blocks, or
    /// `None` when there are no inter blocks.
    pub fn fractions(&self) -> Option<[f64; 3]> {
        (self.inter_blocks > 0).then(|| {
            let n = self.inter_blocks as f64;
            [self.both_virtual as f64 / n, self.one_virtual as f64 / n, self.none as f64 / n]
        })
    }

    pub fn merge(&mut self, o: &RefUsageStats) {
        self.inter_blocks += o.inter_blocks;
        self.both_virtual += o.both_virtual;
        self.one_virtual += o.one_virtual;
        self.none += o.none;
    }
}

fn check(b: &BlockRecord) -> Result<()> {
    let want = match b.mode {
        BlockMode::IntraDc => 0,
        BlockMode::Uni0 | BlockMode::Uni1 => 1,
        BlockMode::Bi => 2,
    };
    if b.refs.len() != want || b.mvs.len() != want {
        return Err(Error::Trace(format!(
            "{:?} block at ({}, {}) lists {} refs and {} vectors",
            b.mode,
            b.x,
            b.y,
            b.refs.len(),
            b.mvs.len()
        )));
    }
    Ok(())
}

pub fn ref_usage(blocks: &[BlockRecord]) -> Result<RefUsageStats> {
    let mut s = RefUsageStats::default();
    for b in blocks {
        check(b)?;
        if !b.mode.is_inter() {
            continue;
        }
        s.inter_blocks += 1;
        let virtuals = b.refs.iter().filter(|r| matches!(r, RefKind::Virtual(_))).count();
        match (b.mode, virtuals) {
            (BlockMode::Bi, 2) => s.both_virtual += 1,
            (_, 0) => s.none += 1,
            _ => s.one_virtual += 1,
        }
    }
    Ok(s)
}

/// Per-frame statistics and their total.
pub fn ref_usage_by_frame(
    blocks: &BTreeMap<u32, Vec<BlockRecord>>,
) -> Result<(BTreeMap<u32, RefUsageStats>, RefUsageStats)> {
    let mut total = RefUsageStats::default();
    let mut per = BTreeMap::new();
    for (&poc, b) in blocks {
        let s = ref_usage(b)?;
        total.merge(&s);
        per.insert(poc, s);
    }
    Ok((per, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(mode: BlockMode, refs: Vec<RefKind>) -> BlockRecord {
        let mvs = vec![(0, 0); refs.len()];
        BlockRecord {
            x: 0,
            y: 0,
            mode,
            refs,
            mvs,
        }
    }

    #[test]
    fn four_block_example() {
        let v = RefKind::Virtual(3);
        let trace = vec![
            block(BlockMode::Bi, vec![v, v]),
            block(BlockMode::Uni0, vec![v]),
            block(BlockMode::Uni1, vec![RefKind::Real(4)]),
            block(BlockMode::IntraDc, vec![]),
        ];
        let s = ref_usage(&trace).unwrap();
        assert_eq!(s.inter_blocks, 3);
        let f = s.fractions().unwrap();
        for x in f {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_bi_counts_as_one() {
        let s = ref_usage(&[block(BlockMode::Bi, vec![RefKind::Real(0), RefKind::Virtual(1)])]).unwrap();
        assert_eq!(s.one_virtual, 1);
    }

    #[test]
    fn intra_only_is_empty() {
        let s = ref_usage(&[block(BlockMode::IntraDc, vec![])]).unwrap();
        assert_eq!(s.fractions(), None);
    }

    #[test]
    fn malformed_trace() {
        assert!(matches!(ref_usage(&[block(BlockMode::Bi, vec![RefKind::Real(0)])]), Err(Error::Trace(_))));
        assert!(ref_usage(&[block(BlockMode::IntraDc, vec![RefKind::Real(0)])]).is_err());
    }
}
