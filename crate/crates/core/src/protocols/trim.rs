//! The trimming protocol for malicious faults with `n > 5f`.
//!
//! Same two rounds as the crash protocol, except that the first `n - f`
//! inputs are sorted and the `f` smallest and `f` largest dropped before
//! checking for unanimity, and the second round uses thresholds a Byzantine
//! minority cannot reach on its own: `f + 1` reports to adopt a value from
//! `⊥`, and `n - 2f` to commit.

use super::crash::{Rules, TwoRound};
use super::{
    BuildOptions, Event, Message, ProcessId, ProcessMachine, ProtocolError, ProtocolKind,
    StepOutput,
};
use crate::spider::{BranchValue, TaskSpec, Value, Vertex};

/// Drops the `f` smallest and `f` largest entries of `values`.
pub fn trim_extremes(values: &[Value], f: usize) -> Vec<Value> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    if sorted.len() <= 2 * f {
        return Vec::new();
    }
    sorted[f..sorted.len() - f].to_vec()
}

/// The common value of the trimmed multiset, or `⊥` if it is mixed.
pub(super) fn unanimous_after_trim(values: &[Value], f: usize) -> BranchValue {
    let kept = trim_extremes(values, f);
    match kept.first() {
        Some(&first) if kept.iter().all(|&v| v == first) => BranchValue::Val(first),
        _ => BranchValue::Bottom,
    }
}

/// State of the trimming protocol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrimCc(pub(super) TwoRound);

impl TrimCc {
    pub fn new(spec: &TaskSpec, id: ProcessId, input: Value) -> Self {
        TrimCc(TwoRound::new(spec, id, input, Rules::Trim))
    }

    pub fn try_new(spec: &TaskSpec, id: ProcessId, input: Value) -> Result<Self, ProtocolError> {
        match ProtocolKind::TrimCc.build(spec, id, input, BuildOptions::default())? {
            super::Machine::Trim(m) => Ok(m),
            _ => unreachable!("trim_cc builds a trim machine"),
        }
    }

    pub fn branch(&self) -> Option<BranchValue> {
        self.0.branch()
    }

    /// The untrimmed first-round multiset, in arrival order.
    pub fn received_inputs(&self) -> &[Value] {
        self.0.received_inputs()
    }
}

impl ProcessMachine for TrimCc {
    fn id(&self) -> ProcessId {
        self.0.id()
    }
    fn step(&mut self, event: &Event) -> Result<StepOutput, ProtocolError> {
        self.0.step(event)
    }
    fn decision(&self) -> Option<Vertex> {
        self.0.decision()
    }
    fn is_duplicate(&self, m: &Message) -> bool {
        self.0.is_duplicate(m)
    }
    fn is_finished(&self) -> bool {
        self.0.is_finished()
    }
}
