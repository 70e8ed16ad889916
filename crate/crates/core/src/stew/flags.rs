use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::TileGrid;

/// Per-tile post-filter switches for one frame: one bit per tile of the
/// frame's inference grid, row-major.
///
/// Wire layout: u16 LE cols, u16 LE rows, then ⌈cols·rows/8⌉ bytes with the
/// bits packed MSB first and zero padding. The POC travels beside it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PfeFlagSection {
    pub poc: u32,
    pub cols: u16,
    pub rows: u16,
    pub flags: Vec<bool>,
}

impl PfeFlagSection {
    pub fn new(poc: u32, cols: u16, rows: u16, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != usize::from(cols) * usize::from(rows) {
            return Err(Error::Malformed(format!(
                "{} flags for a {cols}x{rows} grid",
                flags.len()
            )));
        }
        Ok(Self { poc, cols, rows, flags })
    }

    pub fn for_grid(poc: u32, grid: &TileGrid, flags: Vec<bool>) -> Result<Self> {
        let cols = u16::try_from(grid.cols).map_err(|_| Error::Malformed("too many tile columns".into()))?;
        let rows = u16::try_from(grid.rows).map_err(|_| Error::Malformed("too many tile rows".into()))?;
        Self::new(poc, cols, rows, flags)
    }

    pub fn matches(&self, grid: &TileGrid) -> bool {
        usize::from(self.cols) == grid.cols && usize::from(self.rows) == grid.rows
    }

    pub fn enabled(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.cols.to_le_bytes());
        out.extend_from_slice(&self.rows.to_le_bytes());
        for chunk in self.flags.chunks(8) {
            let mut b = 0u8;
            for (i, &f) in chunk.iter().enumerate() {
                if f {
                    b |= 0x80 >> i;
                }
            }
            out.push(b);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::new();
        self.write(&mut v);
        v
    }

    /// Parses one section from the front of `data`, returning it and the
    /// number of bytes consumed.
    pub fn parse(poc: u32, data: &[u8]) -> Result<(Self, usize)> {
        if data.len() < 4 {
            return Err(Error::Truncated);
        }
        let cols = u16::from_le_bytes([data[0], data[1]]);
        let rows = u16::from_le_bytes([data[2], data[3]]);
        let n = usize::from(cols) * usize::from(rows);
        let len = 4 + n.div_ceil(8);
        if data.len() < len {
            return Err(Error::Truncated);
        }
        let bits = &data[4..len];
        let flags = (0..n).map(|i| bits[i / 8] & (0x80 >> (i % 8)) != 0).collect();
        if n % 8 != 0 && bits[n / 8] & (0xFF >> (n % 8)) != 0 {
            return Err(Error::Malformed("nonzero padding in flag section".into()));
        }
        Ok((Self { poc, cols, rows, flags }, len))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let s = PfeFlagSection::new(3, 2, 2, vec![true, false, true, true]).unwrap();
        assert_eq!(s.to_bytes(), vec![2, 0, 2, 0, 0b1011_0000]);
        let s = PfeFlagSection::new(0, 9, 1, vec![true; 9]).unwrap();
        assert_eq!(s.to_bytes(), vec![9, 0, 1, 0, 0xFF, 0x80]);
    }

    #[test]
    fn errors() {
        assert!(PfeFlagSection::new(0, 2, 2, vec![true]).is_err());
        assert!(matches!(PfeFlagSection::parse(0, &[1, 0]), Err(Error::Truncated)));
        assert!(matches!(PfeFlagSection::parse(0, &[9, 0, 1, 0, 0xFF]), Err(Error::Truncated)));
        assert!(matches!(
            PfeFlagSection::parse(0, &[1, 0, 1, 0, 0xC0]),
            Err(Error::Malformed(_))
        ));
    }

    proptest! {
        #[test]
        fn roundtrip(cols in 0u16..40, rows in 0u16..40, seed in any::<u64>()) {
            let n = usize::from(cols) * usize::from(rows);
            let flags: Vec<bool> = (0..n).map(|i| (seed.rotate_left(i as u32 % 64) ^ i as u64) & 1 == 1).collect();
            let s = PfeFlagSection::new(7, cols, rows, flags).unwrap();
            let mut bytes = s.to_bytes();
            bytes.push(0xAA);
            let (back, used) = PfeFlagSection::parse(7, &bytes).unwrap();
            prop_assert_eq!(used, bytes.len() - 1);
            prop_assert_eq!(back, s);
        }
    }
}
