use std::collections::BTreeSet;
use std::ops::Range;

use super::{AdversaryError, AdversaryPolicy, Injection};
use crate::protocols::{Message, MsgKind, ProcessId, ProtocolKind};
use crate::simnet::SimTime;
use crate::spider::{BranchValue, TaskSpec, Value};

/// The slow schedule for the echo protocol with two values and
/// `n = 3f + 1`: correct processes approve the second value at staggered
/// times, so the `ECHO3(⊥)` messages needed to decide trickle in until just
/// before time 5 (time 7 when `R = 2`).
///
/// Processes are laid out as `A = 0..f-1`, `p = f-1`, `B = f..2f`,
/// `q = 2f` and the faulty set `F = 2f+1..3f+1`. Everyone starts with 0
/// except `q`, which starts with 1.
#[derive(Debug, Clone)]
pub struct SlowDecision {
    epsilon: SimTime,
    f: usize,
}

impl SlowDecision {
    pub fn new(epsilon: SimTime, f: usize) -> Result<SlowDecision, AdversaryError> {
        if f < 2 {
            return Err(AdversaryError::Script(format!("f >= 2, got f={f}")));
        }
        if epsilon <= SimTime::ZERO || epsilon >= SimTime::ONE {
            return Err(AdversaryError::Script(format!("0 < epsilon < 1, got {epsilon}")));
        }
        Ok(SlowDecision { epsilon, f })
    }

    pub fn n(&self) -> usize {
        3 * self.f + 1
    }

    pub fn a(&self) -> Range<usize> {
        0..self.f - 1
    }

    pub fn p(&self) -> ProcessId {
        ProcessId(self.f - 1)
    }

    pub fn b(&self) -> Range<usize> {
        self.f..2 * self.f
    }

    pub fn q(&self) -> ProcessId {
        ProcessId(2 * self.f)
    }

    pub fn byzantine(&self) -> Range<usize> {
        2 * self.f + 1..self.n()
    }

    pub fn inputs(&self) -> Vec<Value> {
        (0..self.n())
            .map(|i| Value(u16::from(ProcessId(i) == self.q())))
            .collect()
    }

    fn half(&self) -> SimTime {
        self.epsilon / SimTime::from_int(2)
    }
}

impl AdversaryPolicy for SlowDecision {
    fn check(&self, spec: &TaskSpec, protocol: ProtocolKind) -> Result<(), AdversaryError> {
        if protocol != ProtocolKind::EchoCc {
            return Err(AdversaryError::Script(format!("echo_cc, got {protocol}")));
        }
        if spec.n != self.n() || spec.f != self.f {
            return Err(AdversaryError::Script(format!(
                "n = 3f+1 = {} with f = {}, got n={}, f={}",
                self.n(),
                self.f,
                spec.n,
                spec.f
            )));
        }
        if spec.value_count != 2 {
            return Err(AdversaryError::Script(format!(
                "two values, got {}",
                spec.value_count
            )));
        }
        Ok(())
    }

    fn faulty(&self) -> BTreeSet<ProcessId> {
        self.byzantine().map(ProcessId).collect()
    }

    fn delay(&mut self, from: ProcessId, to: ProcessId, message: &Message, _: SimTime) -> SimTime {
        let echo_one = message.kind == MsgKind::Echo && message.value == BranchValue::Val(Value(1));
        if echo_one && self.b().contains(&from.0) && to == self.p() {
            self.half()
        } else if echo_one && from == self.p() {
            SimTime::ONE - self.half()
        } else {
            SimTime::ONE
        }
    }

    fn initial_injections(&mut self, _spec: &TaskSpec, _protocol: ProtocolKind) -> Vec<Injection> {
        let two = SimTime::from_int(2);
        let to_b = two - self.epsilon;
        let to_p = two - self.epsilon / SimTime::from_int(4);
        let mut out = Vec::new();
        for from in self.byzantine().map(ProcessId) {
            let targets = self.b().map(|b| (ProcessId(b), to_b)).chain([(self.p(), to_p)]);
            for (to, at) in targets {
                out.push(Injection {
                    from,
                    to,
                    kind: MsgKind::Echo,
                    value: BranchValue::Val(Value(1)),
                    at,
                });
            }
        }
        out
    }
}
