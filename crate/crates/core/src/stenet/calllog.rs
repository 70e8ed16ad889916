use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use super::Tensor;
use crate::flow::FlowField;

/// Every stage of the dataflow that is counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Stage {
    Theta,
    Phi,
    Eq4,
    Eq5,
    Eq6,
    Eq7,
    Eq8,
    Eq9,
    Reconstruct0,
    ReconstructT,
    Reconstruct1,
}

impl Stage {
    pub const ALL: [Stage; 11] = [
        Stage::Theta,
        Stage::Phi,
        Stage::Eq4,
        Stage::Eq5,
        Stage::Eq6,
        Stage::Eq7,
        Stage::Eq8,
        Stage::Eq9,
        Stage::Reconstruct0,
        Stage::ReconstructT,
        Stage::Reconstruct1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Theta => "theta",
            Stage::Phi => "phi",
            Stage::Eq4 => "eq4",
            Stage::Eq5 => "eq5",
            Stage::Eq6 => "eq6",
            Stage::Eq7 => "eq7",
            Stage::Eq8 => "eq8",
            Stage::Eq9 => "eq9",
            Stage::Reconstruct0 => "reconstruct_0",
            Stage::ReconstructT => "reconstruct_t",
            Stage::Reconstruct1 => "reconstruct_1",
        }
    }
}

/// One executed stage with the shape of what it produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub run: u64,
    pub stage: &'static str,
    pub channels: usize,
    pub width: usize,
    pub height: usize,
}

/// Thread-safe stage counters, optionally with a per-stage trace.
#[derive(Debug, Default)]
pub struct CallLog {
    counts: [AtomicU64; 11],
    runs: AtomicU64,
    trace: Option<Mutex<Vec<StageRecord>>>,
}

impl CallLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_trace() -> Self {
        Self {
            trace: Some(Mutex::new(Vec::new())),
            ..Self::default()
        }
    }

    pub(crate) fn begin_run(&self) {
        self.runs.fetch_add(1, Ordering::Relaxed);
    }

    fn bump(&self, stage: Stage, channels: usize, width: usize, height: usize) {
        self.counts[stage as usize].fetch_add(1, Ordering::Relaxed);
        if let Some(trace) = &self.trace {
            trace.lock().expect("trace lock").push(StageRecord {
                run: self.runs.load(Ordering::Relaxed),
                stage: stage.name(),
                channels,
                width,
                height,
            });
        }
    }

    pub(crate) fn record(&self, stage: Stage, t: &Tensor) {
        self.bump(stage, t.len(), t.width, t.height);
    }

    pub(crate) fn record_flow(&self, stage: Stage, f: &FlowField) {
        self.bump(stage, 2, f.width, f.height);
    }

    pub fn count(&self, stage: Stage) -> u64 {
        self.counts[stage as usize].load(Ordering::Relaxed)
    }

    /// Number of dataflow invocations (tiles count separately).
    pub fn runs(&self) -> u64 {
        self.runs.load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> BTreeMap<&'static str, u64> {
        Stage::ALL.iter().map(|&s| (s.name(), self.count(s))).collect()
    }

    pub fn trace(&self) -> Vec<StageRecord> {
        self.trace
            .as_ref()
            .map(|t| t.lock().expect("trace lock").clone())
            .unwrap_or_default()
    }

    pub fn reset(&self) {
        for c in &self.counts {
            c.store(0, Ordering::Relaxed);
        }
        self.runs.store(0, Ordering::Relaxed);
        if let Some(t) = &self.trace {
            t.lock().expect("trace lock").clear();
        }
    }
}
