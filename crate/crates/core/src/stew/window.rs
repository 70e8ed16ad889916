use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::codec::{Dpb, GOP};
use crate::error::{Error, Result};
use crate::frame::Frame;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SlotStatus {
    Pending,
    Reconstructed,
    Enhanced,
    /// Left unenhanced at the end of the sequence.
    PassedThrough,
    Emitted,
}

/// Eight consecutive POCs and the enhanced frames produced for them. The
/// enhanced frames live only here until the window is emitted.
#[derive(Debug)]
pub struct StewWindow {
    base: u32,
    last_poc: u32,
    slots: Vec<SlotStatus>,
    recon: BTreeMap<u32, Arc<Frame>>,
    enh_buffer: BTreeMap<u32, Arc<Frame>>,
    passthrough: bool,
}

impl StewWindow {
    pub fn new(base: u32, last_poc: u32) -> Result<Self> {
        if !base.is_multiple_of(GOP) || base > last_poc {
            return Err(Error::Precondition(format!("window base {base} for last POC {last_poc}")));
        }
        let len = (last_poc - base + 1).min(GOP) as usize;
        Ok(Self {
            base,
            last_poc,
            slots: vec![SlotStatus::Pending; len],
            recon: BTreeMap::new(),
            enh_buffer: BTreeMap::new(),
            passthrough: false,
        })
    }

    /// A window whose frames may be emitted unenhanced, for runs without
    /// the post-filter.
    pub fn without_enhancement(mut self) -> Self {
        self.passthrough = true;
        self
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn contains(&self, poc: u32) -> bool {
        poc >= self.base && ((poc - self.base) as usize) < self.slots.len()
    }

    /// True when the sequence ends before the next window's first frame.
    pub fn is_tail(&self) -> bool {
        self.base + GOP > self.last_poc
    }

    fn slot(&mut self, poc: u32) -> Result<&mut SlotStatus> {
        if !self.contains(poc) {
            return Err(Error::Precondition(format!("POC {poc} outside window {}", self.base)));
        }
        Ok(&mut self.slots[(poc - self.base) as usize])
    }

    pub fn status(&self, poc: u32) -> Option<SlotStatus> {
        self.contains(poc).then(|| self.slots[(poc - self.base) as usize])
    }

    pub fn mark_reconstructed(&mut self, poc: u32, recon: Arc<Frame>) -> Result<()> {
        let s = self.slot(poc)?;
        if *s != SlotStatus::Pending {
            return Err(Error::Precondition(format!("POC {poc} reconstructed twice")));
        }
        *s = SlotStatus::Reconstructed;
        self.recon.insert(poc, recon);
        Ok(())
    }

    pub fn store_enhanced(&mut self, poc: u32, frame: Arc<Frame>) -> Result<()> {
        let s = self.slot(poc)?;
        match *s {
            SlotStatus::Reconstructed => {
                *s = SlotStatus::Enhanced;
                self.enh_buffer.insert(poc, frame);
                Ok(())
            }
            other => Err(Error::Precondition(format!("cannot enhance POC {poc} in state {other:?}"))),
        }
    }

    pub fn enhanced(&self) -> impl Iterator<Item = (u32, &Arc<Frame>)> {
        self.enh_buffer.iter().map(|(&p, f)| (p, f))
    }

    /// Hands out the window's frames in display order. A full window must
    /// have every frame enhanced; at the end of the sequence reconstructed
    /// frames without an enhancement pass through as copies.
    pub fn emit(&mut self) -> Result<Vec<Arc<Frame>>> {
        let tail = self.is_tail() || self.passthrough;
        for (i, s) in self.slots.iter().enumerate() {
            let ok = matches!(s, SlotStatus::Enhanced) || (tail && matches!(s, SlotStatus::Reconstructed));
            if !ok {
                return Err(Error::WindowIncomplete(format!(
                    "POC {} is {s:?} in window {}",
                    self.base + i as u32,
                    self.base
                )));
            }
        }
        let mut out = Vec::with_capacity(self.slots.len());
        for i in 0..self.slots.len() {
            let poc = self.base + i as u32;
            let frame = match self.enh_buffer.remove(&poc) {
                Some(f) => f,
                None => {
                    self.slots[i] = SlotStatus::PassedThrough;
                    Arc::new(Frame::clone(&self.recon[&poc]))
                }
            };
            out.push(frame);
        }
        self.slots.iter_mut().for_each(|s| *s = SlotStatus::Emitted);
        Ok(out)
    }
}

/// Checks that synthesis and enhancement only ever read reconstructions and
/// that virtual frames stay out of the DPB.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PurityAudit {
    pub reads: u64,
    pub violations: Vec<String>,
}

impl PurityAudit {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn check_read(&mut self, poc: u32, frame: &Arc<Frame>, dpb: &Dpb, enhanced: &[Arc<Frame>]) {
        self.reads += 1;
        if !dpb.get(poc).is_some_and(|d| Arc::ptr_eq(d, frame)) {
            self.violations.push(format!("input {poc} is not the DPB reconstruction"));
        }
        if enhanced.iter().any(|e| Arc::ptr_eq(e, frame)) {
            self.violations.push(format!("input {poc} is an enhanced frame"));
        }
    }

    pub fn check_dpb(&mut self, dpb: &Dpb, virtuals: &[Arc<Frame>], enhanced: &[Arc<Frame>]) {
        for (poc, f) in dpb.iter() {
            if virtuals.iter().chain(enhanced).any(|v| Arc::ptr_eq(v, f)) {
                self.violations.push(format!("DPB entry {poc} is not a reconstruction"));
            }
        }
    }

    /// Errors if any violation was recorded.
    pub fn ensure_clean(&self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::BufferPurity(format!("{} violation(s), first: {v}", self.violations.len()))),
        }
    }
}
