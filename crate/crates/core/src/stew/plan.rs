use serde::Serialize;

use super::{distance_of, Action, ActionKind};
use crate::codec::{ToolFlags, GOP};

/// One step of the interleaved schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Step {
    /// Code (or decode) the frame.
    Code(u32),
    /// Run an action; any flag sections it produces travel in the payload of
    /// frame `carrier`.
    Act { action: Action, carrier: u32 },
}

impl Step {
    pub fn action(&self) -> Option<Action> {
        match *self {
            Step::Act { action, .. } => Some(action),
            Step::Code(_) => None,
        }
    }
}

/// Offsets within a window in coding order.
const ORDER: [u32; 8] = [8, 4, 2, 1, 3, 6, 5, 7];

/// The schedule for the GOP that starts at `base`, with every tool on.
pub fn plan_window(base: u32, last_poc: u32) -> Vec<Step> {
    plan_window_with(base, last_poc, ToolFlags::ALL)
}

/// The schedule for the GOP that starts at `base`: frames `base+1 ..=
/// base+8` in coding order, each preceded by its synthesis or joint action
/// and enhancement pairs placed right after their second frame. Actions
/// whose inputs lie beyond `last_poc` are dropped.
///
/// With joint inference off, a joint action becomes a synthesis at
/// distance 1 followed by enhancement of the same pair, both before the
/// centre frame. With RFS or PFE off the respective half is dropped.
pub fn plan_window_with(base: u32, last_poc: u32, tools: ToolFlags) -> Vec<Step> {
    debug_assert!(base.is_multiple_of(GOP));
    let mut steps = Vec::new();
    for p in ORDER.map(|o| base + o) {
        if p > last_poc {
            continue;
        }
        let kinds = super::mode_of(p);
        if kinds.contains(&ActionKind::J) && p < last_poc {
            let pair = Action::Enhance {
                first: p - 1,
                second: p + 1,
            };
            let synth = Action::Synthesize { target: p, distance: 1 };
            let acts: Vec<Action> = match (tools.rfs, tools.pfe, tools.jise) {
                (true, true, true) => vec![Action::Joint { center: p }],
                (true, true, false) => vec![synth, pair],
                (true, false, _) => vec![synth],
                (false, true, _) => vec![pair],
                (false, false, _) => vec![],
            };
            steps.extend(acts.into_iter().map(|action| Step::Act { action, carrier: p }));
        }
        if kinds.contains(&ActionKind::S) && tools.rfs {
            let d = distance_of(p).expect("S implies a distance");
            if p + d <= last_poc {
                steps.push(Step::Act {
                    action: Action::Synthesize { target: p, distance: d },
                    carrier: p,
                });
            }
        }
        steps.push(Step::Code(p));
        if kinds.contains(&ActionKind::E) && tools.pfe {
            steps.push(Step::Act {
                action: Action::Enhance {
                    first: p - 2,
                    second: p,
                },
                carrier: p,
            });
        }
    }
    steps
}

/// The whole sequence: POC 0, then one window plan per GOP.
pub fn plan_sequence(num_frames: u32, tools: ToolFlags) -> Vec<Step> {
    if num_frames == 0 {
        return Vec::new();
    }
    let last = num_frames - 1;
    let mut steps = vec![Step::Code(0)];
    let mut base = 0;
    while base < last {
        steps.extend(plan_window_with(base, last, tools));
        base += GOP;
    }
    steps
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub order: usize,
    pub kind: ActionKind,
    pub target: u32,
    pub inputs: [u32; 2],
    pub d: Option<u32>,
}

/// Actions of a plan in execution order.
pub fn schedule_trace(steps: &[Step]) -> Vec<TraceEntry> {
    steps
        .iter()
        .filter_map(Step::action)
        .enumerate()
        .map(|(order, a)| {
            let (i0, i1) = a.inputs();
            TraceEntry {
                order,
                kind: a.kind(),
                target: a.target(),
                inputs: [i0, i1],
                d: match a {
                    Action::Synthesize { distance, .. } => Some(distance),
                    _ => None,
                },
            }
        })
        .collect()
}
