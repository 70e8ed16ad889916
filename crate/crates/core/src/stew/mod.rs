//! The space-time enhancement window: which frames get a synthesized
//! reference, which pairs get post-filtered, and when each runs relative to
//! the coding order.
//!
//! Every window spans eight consecutive POCs starting at a multiple of 8.
//! Reference synthesis for frame `p` runs right before `p` is coded, from
//! the reconstructions `d` POCs either side. Enhancement takes two
//! reconstructions two POCs apart as soon as both exist. At POCs 1 and 5 of
//! a window the two are fused into one joint inference.

mod flags;
mod pfe;
mod pipeline;
mod plan;
mod window;

use serde::Serialize;

pub use flags::PfeFlagSection;
pub use pfe::{assemble, decide_flags};
pub use pipeline::{
    decode_sequence, decode_sequence_with, encode_sequence, ActionRecord, EncodeOptions, FrameCoder, SequenceDecode, SequenceEncode,
    SessionOutput,
};
pub use plan::{plan_sequence, plan_window, plan_window_with, schedule_trace, Step, TraceEntry};
pub use window::{PurityAudit, SlotStatus, StewWindow};

use crate::codec::GOP;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ActionKind {
    /// Reference frame synthesis.
    S,
    /// Post-filter enhancement of a pair.
    E,
    /// Joint synthesis and enhancement.
    J,
}

/// Which tools act on frame `p`.
pub fn mode_of(p: u32) -> &'static [ActionKind] {
    match p % GOP {
        2 | 4 | 6 => &[ActionKind::S],
        3 | 7 => &[ActionKind::S, ActionKind::E],
        1 | 5 => &[ActionKind::J],
        _ => &[],
    }
}

/// POC distance from a synthesized frame to each of its two inputs.
pub fn distance_of(p: u32) -> Result<u32> {
    match p % GOP {
        4 => Ok(4),
        2 | 6 => Ok(2),
        3 | 7 => Ok(1),
        r => Err(Error::Precondition(format!("no synthesis distance for POC {p} (mod 8 = {r})"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Action {
    /// Virtual reference for `target` from the reconstructions at
    /// `target ± distance`.
    Synthesize { target: u32, distance: u32 },
    /// Enhances the reconstructions `first` and `second`.
    Enhance { first: u32, second: u32 },
    /// Virtual reference for `center` plus enhancement of `center ± 1`.
    Joint { center: u32 },
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Synthesize { .. } => ActionKind::S,
            Action::Enhance { .. } => ActionKind::E,
            Action::Joint { .. } => ActionKind::J,
        }
    }

    /// The two reconstructions the action reads.
    pub fn inputs(&self) -> (u32, u32) {
        match *self {
            Action::Synthesize { target, distance } => (target - distance, target + distance),
            Action::Enhance { first, second } => (first, second),
            Action::Joint { center } => (center - 1, center + 1),
        }
    }

    pub fn target(&self) -> u32 {
        match *self {
            Action::Synthesize { target, .. } => target,
            Action::Enhance { second, .. } => second,
            Action::Joint { center } => center,
        }
    }

    pub fn gap(&self) -> u32 {
        let (a, b) = self.inputs();
        b - a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_examples() {
        assert_eq!(mode_of(4), &[ActionKind::S]);
        assert_eq!(mode_of(11), &[ActionKind::S, ActionKind::E]);
        assert_eq!(mode_of(13), &[ActionKind::J]);
        assert!(mode_of(16).is_empty());
        assert!(mode_of(0).is_empty());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance_of(4).unwrap(), 4);
        assert_eq!(distance_of(6).unwrap(), 2);
        assert_eq!(distance_of(7).unwrap(), 1);
        assert_eq!(distance_of(2).unwrap(), 2);
        assert!(distance_of(1).is_err());
        assert!(distance_of(8).is_err());
    }

    #[test]
    fn synthesis_stays_within_the_gop() {
        for p in 0..64 {
            if let Ok(d) = distance_of(p) {
                let base = p / 8 * 8;
                assert!(p - d >= base && p + d <= base + 8, "{p}");
            }
        }
    }
}
