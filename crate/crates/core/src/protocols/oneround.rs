//! Single-exchange protocols for `R = 2` at high resilience.
//!
//! Each process sends its input and decides on the first `n - f` inputs it
//! receives: commit if they agree, adopt if one value is frequent enough,
//! `(⊥, 0)` otherwise. The Byzantine mode trims `f` values from each end
//! first and uses the `n - 6f` adoption threshold.

use std::hash::{Hash, Hasher};

use super::trim::trim_extremes;
use super::{
    validate_message, Event, Message, MsgKind, ProcessId, ProcessMachine, ProtocolError,
    ProtocolKind, StepOutput,
};
use crate::spider::{BranchValue, TaskSpec, Value, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Mode {
    Crash,
    Byzantine,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OneRoundCc {
    spec: TaskSpec,
    id: ProcessId,
    input: Value,
    mode: Mode,
    awake: bool,
    input_seen: Vec<bool>,
    inputs: Vec<Value>,
    decision: Option<Vertex>,
}

impl OneRoundCc {
    /// Crash-tolerant variant, `n > 4f`.
    pub fn crash(spec: &TaskSpec, id: ProcessId, input: Value) -> Self {
        Self::new(spec, id, input, Mode::Crash)
    }

    /// Byzantine variant, `n > 12f`.
    pub fn byzantine(spec: &TaskSpec, id: ProcessId, input: Value) -> Self {
        Self::new(spec, id, input, Mode::Byzantine)
    }

    fn new(spec: &TaskSpec, id: ProcessId, input: Value, mode: Mode) -> Self {
        OneRoundCc {
            spec: *spec,
            id,
            input,
            mode,
            awake: false,
            input_seen: vec![false; spec.n],
            inputs: Vec::with_capacity(spec.n - spec.f),
            decision: None,
        }
    }

    pub(super) fn hash_abstract(&self, h: &mut dyn Hasher, keep: &dyn Fn(usize) -> bool) {
        let mut h = h;
        (2u8, self.input, self.mode, self.awake, self.decision).hash(&mut h);
        let mut inputs = self.inputs.clone();
        inputs.sort_unstable();
        inputs.hash(&mut h);
        for s in (0..self.spec.n).filter(|&s| keep(s)) {
            self.input_seen[s].hash(&mut h);
        }
    }

    fn protocol(&self) -> ProtocolKind {
        match self.mode {
            Mode::Crash => ProtocolKind::OneRoundCrash,
            Mode::Byzantine => ProtocolKind::OneRoundByz,
        }
    }

    fn decide(&self) -> Vertex {
        let (n, f) = (self.spec.n, self.spec.f);
        let (kept, adopt_threshold) = match self.mode {
            Mode::Crash => (self.inputs.clone(), n - 2 * f),
            Mode::Byzantine => (trim_extremes(&self.inputs, f), n.saturating_sub(6 * f)),
        };
        let mut counts = vec![0usize; self.spec.value_count];
        for v in &kept {
            counts[v.index()] += 1;
        }
        if let Some(v) = super::first_reaching(&counts, kept.len().max(1)) {
            return Vertex::on_branch(v, 2);
        }
        match super::first_reaching(&counts, adopt_threshold.max(1)) {
            Some(v) => Vertex::on_branch(v, 1),
            None => Vertex::CENTER,
        }
    }
}

impl ProcessMachine for OneRoundCc {
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
        if self.is_duplicate(m) {
            return Ok(out);
        }
        self.input_seen[m.sender.0] = true;
        if self.decision.is_some() {
            return Ok(out);
        }
        if let BranchValue::Val(v) = m.value {
            self.inputs.push(v);
        }
        if self.inputs.len() == self.spec.n - self.spec.f {
            let d = self.decide();
            self.decision = Some(d);
            out.decision = Some(d);
        }
        Ok(out)
    }

    fn decision(&self) -> Option<Vertex> {
        self.decision
    }

    fn is_duplicate(&self, m: &Message) -> bool {
        m.kind == MsgKind::Input && self.input_seen[m.sender.0]
    }

    fn is_finished(&self) -> bool {
        self.decision.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::testutil::{deliver, run_events, val};
    use crate::protocols::BuildOptions;
    use crate::spider::FailureModel;

    fn run(kind: ProtocolKind, n: usize, f: usize, k: usize, inputs: &[(u16, usize)]) -> Vertex {
        let model = kind.failure_model();
        let spec = TaskSpec::new(k, 2, n, f, model).unwrap();
        let mut m = kind
            .build(&spec, ProcessId(0), Value(inputs[0].0), BuildOptions::default())
            .unwrap();
        let mut events = vec![Event::Wakeup];
        let mut sender = 0;
        for &(v, count) in inputs {
            for _ in 0..count {
                events.push(deliver(MsgKind::Input, val(v), sender));
                sender += 1;
            }
        }
        run_events(&mut m, &events).expect("decides on n - f inputs")
    }

    #[test]
    fn crash_variant() {
        let k = ProtocolKind::OneRoundCrash;
        assert_eq!(run(k, 9, 2, 4, &[(3, 7)]), Vertex::on_branch(Value(3), 2));
        assert_eq!(run(k, 9, 2, 4, &[(0, 5), (1, 2)]), Vertex::on_branch(Value(0), 1));
        assert_eq!(run(k, 9, 2, 4, &[(0, 4), (1, 3)]), Vertex::CENTER);
    }

    #[test]
    fn byzantine_variant() {
        let k = ProtocolKind::OneRoundByz;
        assert_eq!(run(k, 14, 1, 10, &[(5, 13)]), Vertex::on_branch(Value(5), 2));
        assert_eq!(
            run(k, 14, 1, 10, &[(0, 9), (1, 3), (9, 1)]),
            Vertex::on_branch(Value(0), 1)
        );
        assert_eq!(run(k, 14, 1, 10, &[(0, 7), (1, 6)]), Vertex::CENTER);
    }

    #[test]
    fn byzantine_variant_trims_before_commit() {
        // A single extreme value is dropped, so the rest still commits.
        let k = ProtocolKind::OneRoundByz;
        assert_eq!(
            run(k, 14, 1, 10, &[(4, 12), (9, 1)]),
            Vertex::on_branch(Value(4), 2)
        );
    }

    #[test]
    fn rejects_branch_messages() {
        let spec = TaskSpec::new(2, 2, 5, 1, FailureModel::Crash).unwrap();
        let mut m = OneRoundCc::crash(&spec, ProcessId(0), Value(0));
        m.step(&Event::Wakeup).unwrap();
        assert!(m.step(&deliver(MsgKind::Branch, val(0), 1)).is_err());
    }
}
