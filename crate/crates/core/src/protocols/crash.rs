//! The crash-tolerant protocol and the round skeleton it shares with the
//! trimming protocol.
//!
//! Round 1 exchanges inputs. After `n - f` of them a process picks a branch:
//! a value if the round was unanimous, `⊥` otherwise. For `R = 1` the branch
//! is the decision. For `R = 2` branches are exchanged in a second round and
//! the process decides a vertex on its branch.

use super::{
    first_reaching, validate_message, BuildOptions, Event, Message, MsgKind, Mutation,
    ProcessId, ProcessMachine, ProtocolError, ProtocolKind, StepOutput,
};
use std::hash::{Hash, Hasher};

use crate::spider::{BranchValue, TaskSpec, Value, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(super) enum Rules {
    Crash(Option<Mutation>),
    Trim,
}

/// Bookkeeping common to the two-round protocols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(super) struct TwoRound {
    spec: TaskSpec,
    id: ProcessId,
    input: Value,
    rules: Rules,
    awake: bool,
    input_seen: Vec<bool>,
    /// First `n - f` INPUT values, in arrival order.
    inputs: Vec<Value>,
    branch: Option<BranchValue>,
    branch_seen: Vec<bool>,
    /// First `n - f` BRANCH values, in arrival order.
    branches: Vec<BranchValue>,
    decision: Option<Vertex>,
}

impl TwoRound {
    pub(super) fn new(spec: &TaskSpec, id: ProcessId, input: Value, rules: Rules) -> Self {
        TwoRound {
            spec: *spec,
            id,
            input,
            rules,
            awake: false,
            input_seen: vec![false; spec.n],
            inputs: Vec::with_capacity(spec.n - spec.f),
            branch: None,
            branch_seen: vec![false; spec.n],
            branches: Vec::with_capacity(spec.n - spec.f),
            decision: None,
        }
    }

    pub(super) fn hash_abstract(&self, h: &mut dyn Hasher, keep: &dyn Fn(usize) -> bool) {
        let mut h = h;
        (self.input, self.rules, self.awake, self.branch, self.decision).hash(&mut h);
        let mut inputs = self.inputs.clone();
        inputs.sort_unstable();
        inputs.hash(&mut h);
        let mut branches = self.branches.clone();
        branches.sort_unstable();
        branches.hash(&mut h);
        for s in (0..self.spec.n).filter(|&s| keep(s)) {
            (self.input_seen[s], self.branch_seen[s]).hash(&mut h);
        }
    }

    fn protocol(&self) -> ProtocolKind {
        match self.rules {
            Rules::Crash(_) => ProtocolKind::CrashCc,
            Rules::Trim => ProtocolKind::TrimCc,
        }
    }

    fn quorum(&self) -> usize {
        self.spec.n - self.spec.f
    }

    pub(super) fn branch(&self) -> Option<BranchValue> {
        self.branch
    }

    pub(super) fn received_inputs(&self) -> &[Value] {
        &self.inputs
    }

    pub(super) fn received_branches(&self) -> &[BranchValue] {
        &self.branches
    }

    fn choose_branch(&self) -> BranchValue {
        match self.rules {
            Rules::Crash(mutation) => {
                let first = self.inputs[0];
                if self.inputs.iter().all(|&v| v == first) {
                    BranchValue::Val(first)
                } else if mutation == Some(Mutation::BranchFromOwnInput) {
                    BranchValue::Val(self.input)
                } else {
                    BranchValue::Bottom
                }
            }
            Rules::Trim => super::trim::unanimous_after_trim(&self.inputs, self.spec.f),
        }
    }

    fn decide_second_round(&self, branch: BranchValue) -> Vertex {
        let k = self.spec.value_count;
        let mut counts = vec![0usize; k];
        for b in &self.branches {
            if let BranchValue::Val(v) = b {
                counts[v.index()] += 1;
            }
        }
        let total = self.branches.len();
        let (adopt_threshold, commit_threshold) = match self.rules {
            // "at least one" and "all of them"
            Rules::Crash(_) => (1, total),
            Rules::Trim => (self.spec.f + 1, self.spec.n - 2 * self.spec.f),
        };
        match branch {
            BranchValue::Bottom => match first_reaching(&counts, adopt_threshold) {
                Some(v) => Vertex::on_branch(v, 1),
                None => Vertex::CENTER,
            },
            BranchValue::Val(own) => match first_reaching(&counts, commit_threshold) {
                Some(v) => Vertex::on_branch(v, 2),
                None => Vertex::on_branch(own, 1),
            },
        }
    }

    fn try_second_round(&mut self, out: &mut StepOutput) {
        if self.decision.is_some() || self.branches.len() < self.quorum() {
            return;
        }
        if let Some(branch) = self.branch {
            let d = self.decide_second_round(branch);
            self.decision = Some(d);
            out.decision = Some(d);
        }
    }

    fn on_input(&mut self, m: &Message, out: &mut StepOutput) {
        let BranchValue::Val(v) = m.value else {
            return;
        };
        if self.inputs.len() >= self.quorum() {
            return;
        }
        self.inputs.push(v);
        if self.inputs.len() < self.quorum() {
            return;
        }
        let branch = self.choose_branch();
        self.branch = Some(branch);
        if self.spec.refinement == 1 {
            let d = match branch {
                BranchValue::Val(v) => Vertex::on_branch(v, 1),
                BranchValue::Bottom => Vertex::CENTER,
            };
            self.decision = Some(d);
            out.decision = Some(d);
        } else {
            out.broadcast(Message::new(MsgKind::Branch, branch, self.id));
            self.try_second_round(out);
        }
    }

    fn on_branch(&mut self, m: &Message, out: &mut StepOutput) {
        if self.branches.len() < self.quorum() {
            self.branches.push(m.value);
        }
        self.try_second_round(out);
    }
}

impl ProcessMachine for TwoRound {
    fn id(&self) -> ProcessId {
        self.id
    }

    fn step(&mut self, event: &Event) -> Result<StepOutput, ProtocolError> {
        let mut out = StepOutput::default();
        let m = match event {
            Event::Wakeup => {
                if self.awake {
                    return Err(ProtocolError::DuplicateWakeup(self.id));
                }
                self.awake = true;
                out.broadcast(Message::new(MsgKind::Input, self.input.into(), self.id));
                return Ok(out);
            }
            Event::Deliver(m) => m,
        };
        if !self.awake {
            return Err(ProtocolError::NotAwake(self.id));
        }
        validate_message(self.protocol(), &self.spec, m)?;
        if m.kind == MsgKind::Branch && self.spec.refinement == 1 {
            return Err(ProtocolError::ForeignMessage {
                protocol: self.protocol(),
                kind: m.kind,
            });
        }
        if self.is_duplicate(m) {
            return Ok(out);
        }
        let seen = match m.kind {
            MsgKind::Input => &mut self.input_seen,
            _ => &mut self.branch_seen,
        };
        seen[m.sender.0] = true;
        if self.decision.is_some() {
            return Ok(out);
        }
        match m.kind {
            MsgKind::Input => self.on_input(m, &mut out),
            _ => self.on_branch(m, &mut out),
        }
        Ok(out)
    }

    fn decision(&self) -> Option<Vertex> {
        self.decision
    }

    fn is_duplicate(&self, m: &Message) -> bool {
        match m.kind {
            MsgKind::Input => self.input_seen[m.sender.0],
            MsgKind::Branch => self.branch_seen[m.sender.0],
            _ => false,
        }
    }

    fn is_finished(&self) -> bool {
        self.decision.is_some()
    }
}

/// State of the crash-tolerant protocol (`n > 2f`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CrashCc(pub(super) TwoRound);

impl CrashCc {
    pub fn new(spec: &TaskSpec, id: ProcessId, input: Value, mutation: Option<Mutation>) -> Self {
        CrashCc(TwoRound::new(spec, id, input, Rules::Crash(mutation)))
    }

    /// Builds a machine after validating the instance.
    pub fn try_new(spec: &TaskSpec, id: ProcessId, input: Value) -> Result<Self, ProtocolError> {
        match ProtocolKind::CrashCc.build(spec, id, input, BuildOptions::default())? {
            super::Machine::Crash(m) => Ok(m),
            _ => unreachable!("crash_cc builds a crash machine"),
        }
    }

    /// The branch chosen after the first round, if reached.
    pub fn branch(&self) -> Option<BranchValue> {
        self.0.branch()
    }

    pub fn received_inputs(&self) -> &[Value] {
        self.0.received_inputs()
    }

    pub fn received_branches(&self) -> &[BranchValue] {
        self.0.received_branches()
    }
}

impl ProcessMachine for CrashCc {
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
