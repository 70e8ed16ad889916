//! MSB-first bit I/O and exp-Golomb codes.

use crate::error::{Error, Result};

/// Longest accepted exp-Golomb prefix; keeps decoded values within u32.
const MAX_LEADING_ZEROS: u32 = 31;

/// Sink for bits. Implemented by [`BitWriter`] and by [`BitCounter`], which
/// only counts and lets rate estimation share the syntax writers.
pub trait BitSink {
    fn put_bits(&mut self, value: u64, n: u32);

    fn put_bit(&mut self, bit: bool) {
        self.put_bits(u64::from(bit), 1);
    }

    fn put_ue(&mut self, v: u32) {
        let x = u64::from(v) + 1;
        let len = 64 - x.leading_zeros();
        self.put_bits(0, len - 1);
        self.put_bits(x, len);
    }

    fn put_se(&mut self, v: i32) {
        let mapped = if v > 0 {
            2 * v.unsigned_abs() - 1
        } else {
            2 * v.unsigned_abs()
        };
        self.put_ue(mapped);
    }
}

#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u8,
    used: u32,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> u64 {
        self.bits
    }

    /// Pads the last byte with zero bits.
    pub fn finish(mut self) -> Vec<u8> {
        if self.used > 0 {
            self.bytes.push(self.acc << (8 - self.used));
        }
        self.bytes
    }
}

impl BitSink for BitWriter {
    fn put_bits(&mut self, value: u64, n: u32) {
        debug_assert!(n <= 64);
        for i in (0..n).rev() {
            self.acc = (self.acc << 1) | ((value >> i) & 1) as u8;
            self.used += 1;
            if self.used == 8 {
                self.bytes.push(self.acc);
                self.acc = 0;
                self.used = 0;
            }
        }
        self.bits += u64::from(n);
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BitCounter {
    pub bits: u64,
}

impl BitSink for BitCounter {
    fn put_bits(&mut self, _value: u64, n: u32) {
        self.bits += u64::from(n);
    }

    fn put_ue(&mut self, v: u32) {
        self.bits += u64::from(ue_len(v));
    }
}

/// Length in bits of ue(v).
pub fn ue_len(v: u32) -> u32 {
    let x = u64::from(v) + 1;
    2 * (64 - x.leading_zeros()) - 1
}

#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.data.len() as u64 * 8 - self.pos
    }

    pub fn bit(&mut self) -> Result<bool> {
        if self.pos >= self.data.len() as u64 * 8 {
            return Err(Error::Truncated);
        }
        let byte = self.data[(self.pos / 8) as usize];
        let b = (byte >> (7 - self.pos % 8)) & 1;
        self.pos += 1;
        Ok(b == 1)
    }

    pub fn bits(&mut self, n: u32) -> Result<u64> {
        debug_assert!(n <= 64);
        if u64::from(n) > self.remaining() {
            return Err(Error::Truncated);
        }
        let mut v = 0u64;
        for _ in 0..n {
            v = (v << 1) | u64::from(self.bit()?);
        }
        Ok(v)
    }

    pub fn ue(&mut self) -> Result<u32> {
        let mut zeros = 0;
        while !self.bit()? {
            zeros += 1;
            if zeros > MAX_LEADING_ZEROS {
                return Err(Error::Malformed("exp-Golomb prefix too long".into()));
            }
        }
        let rest = self.bits(zeros)?;
        let v = (1u64 << zeros) + rest - 1;
        u32::try_from(v).map_err(|_| Error::Malformed("exp-Golomb value overflows".into()))
    }

    pub fn se(&mut self) -> Result<i32> {
        let k = self.ue()?;
        let mag = i64::from(k.div_ceil(2));
        let v = if k % 2 == 1 { mag } else { -mag };
        i32::try_from(v).map_err(|_| Error::Malformed("signed exp-Golomb overflows".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bit_string(f: impl FnOnce(&mut BitWriter)) -> String {
        let mut w = BitWriter::new();
        f(&mut w);
        let n = w.bit_len() as usize;
        let bytes = w.finish();
        bytes
            .iter()
            .flat_map(|b| (0..8).rev().map(move |i| if b >> i & 1 == 1 { '1' } else { '0' }))
            .take(n)
            .collect()
    }

    /// Exp-Golomb by definition: `len(v+1) - 1` zeros then `v+1` in binary.
    fn ue_oracle(v: u32) -> String {
        let bin = format!("{:b}", u64::from(v) + 1);
        format!("{}{}", "0".repeat(bin.len() - 1), bin)
    }

    #[test]
    fn ue_known_codes() {
        assert_eq!(bit_string(|w| w.put_ue(0)), "1");
        assert_eq!(bit_string(|w| w.put_ue(3)), "00100");
        for v in [1, 2, 7, 8, 100, 65535, u32::MAX - 1, u32::MAX] {
            assert_eq!(bit_string(|w| w.put_ue(v)), ue_oracle(v), "{v}");
            assert_eq!(ue_len(v) as usize, ue_oracle(v).len());
        }
    }

    #[test]
    fn se_mapping() {
        assert_eq!(bit_string(|w| w.put_se(0)), "1");
        assert_eq!(bit_string(|w| w.put_se(1)), "010");
        assert_eq!(bit_string(|w| w.put_se(-1)), "011");
    }

    #[test]
    fn se_roundtrip_small_range() {
        let mut w = BitWriter::new();
        for v in -100..=100 {
            w.put_se(v);
        }
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        for v in -100..=100 {
            assert_eq!(r.se().unwrap(), v);
        }
    }

    #[test]
    fn truncation_and_long_prefix() {
        assert!(matches!(BitReader::new(&[]).ue(), Err(Error::Truncated)));
        assert!(matches!(BitReader::new(&[0x00]).ue(), Err(Error::Truncated)));
        assert!(matches!(BitReader::new(&[0, 0, 0, 0, 0x80]).ue(), Err(Error::Malformed(_))));
    }

    #[test]
    fn counter_matches_writer() {
        let mut w = BitWriter::new();
        let mut c = BitCounter::default();
        for v in [0u32, 5, 1000, 77] {
            w.put_ue(v);
            c.put_ue(v);
            w.put_se(-(v as i32));
            c.put_se(-(v as i32));
        }
        w.put_bits(5, 3);
        c.put_bits(5, 3);
        assert_eq!(w.bit_len(), c.bits);
    }

    proptest! {
        #[test]
        fn mixed_roundtrip(vals in proptest::collection::vec((any::<u32>(), any::<i32>(), 0u32..17), 0..50)) {
            let mut w = BitWriter::new();
            for &(u, s, n) in &vals {
                w.put_ue(u);
                w.put_se(s.max(-i32::MAX));
                w.put_bits(u64::from(u) & ((1 << n) - 1), n);
            }
            let bytes = w.finish();
            let mut r = BitReader::new(&bytes);
            for &(u, s, n) in &vals {
                prop_assert_eq!(r.ue().unwrap(), u);
                prop_assert_eq!(r.se().unwrap(), s.max(-i32::MAX));
                prop_assert_eq!(r.bits(n).unwrap(), u64::from(u) & ((1 << n) - 1));
            }
        }
    }
}
