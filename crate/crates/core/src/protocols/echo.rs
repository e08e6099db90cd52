//! The echo-amplification protocol for malicious faults with optimal
//! resilience `n > 3f`.
//!
//! Values climb through echo levels. Level 1 (`ECHO`) amplifies any value
//! seen `f + 1` times, and starts an echo for `⊥` once `f + 1` echoes
//! disagree with the most frequent value. A value echoed by `n - f`
//! processes is *approved*; the first approval is announced with `ECHO2`.
//! `ECHO3` carries either the value `n - f` processes announced, or `⊥` once
//! two values are approved; correct processes never send two different
//! non-`⊥` values there. For `R = 1` the decision is taken from `ECHO3`; for
//! `R = 2` the same rule feeds `ECHO4`, which feeds `ECHO5`, which decides.
//!
//! The handlers are evaluated as guards run to a fixpoint after every
//! delivery, each guarded by a once-flag, in the fixed order G1..G8 below
//! with ties broken by the smallest slot (values before `⊥`). Processing
//! continues after the decision so that slower processes still receive the
//! echoes they need.

use std::hash::{Hash, Hasher};

use super::{
    validate_message, BuildOptions, Event, Message, MsgKind, ProcessId, ProcessMachine,
    ProtocolError, ProtocolKind, StepOutput,
};
use crate::spider::{BranchValue, TaskSpec, Value, Vertex};

/// Echo levels 2..=5 live at indices 0..=3.
const LEVELS: usize = 4;

fn level_index(kind: MsgKind) -> Option<usize> {
    kind.echo_level().map(|l| l - 2)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EchoCc {
    spec: TaskSpec,
    id: ProcessId,
    input: Value,
    awake: bool,
    approved: Vec<bool>,
    num_echo: Vec<u32>,
    num_level: [Vec<u32>; LEVELS],
    sent_echo: Vec<bool>,
    sent_level: [Option<BranchValue>; LEVELS],
    decision: Option<Vertex>,
    /// `sender * slots + slot` for ECHO.
    echo_seen: Vec<bool>,
    /// `level * n + sender` for ECHO2..ECHO5.
    level_seen: Vec<bool>,
}

impl EchoCc {
    pub fn new(spec: &TaskSpec, id: ProcessId, input: Value) -> Self {
        let slots = spec.value_count + 1;
        EchoCc {
            spec: *spec,
            id,
            input,
            awake: false,
            approved: vec![false; slots],
            num_echo: vec![0; slots],
            num_level: std::array::from_fn(|_| vec![0; slots]),
            sent_echo: vec![false; slots],
            sent_level: [None; LEVELS],
            decision: None,
            echo_seen: vec![false; spec.n * slots],
            level_seen: vec![false; spec.n * LEVELS],
        }
    }

    pub fn try_new(spec: &TaskSpec, id: ProcessId, input: Value) -> Result<Self, ProtocolError> {
        match ProtocolKind::EchoCc.build(spec, id, input, BuildOptions::default())? {
            super::Machine::Echo(m) => Ok(m),
            _ => unreachable!("echo_cc builds an echo machine"),
        }
    }

    pub(super) fn hash_abstract(&self, h: &mut dyn Hasher, keep: &dyn Fn(usize) -> bool) {
        let mut h = h;
        (3u8, self.input, self.awake, self.decision).hash(&mut h);
        (&self.approved, &self.sent_echo, &self.sent_level).hash(&mut h);
        let slots = self.slots();
        for slot in 0..slots {
            if self.echo_live(slot) {
                (slot, self.num_echo[slot]).hash(&mut h);
                for s in (0..self.spec.n).filter(|&s| keep(s)) {
                    self.echo_seen[s * slots + slot].hash(&mut h);
                }
            }
        }
        for level in 0..LEVELS {
            if self.level_live(level) {
                (level, &self.num_level[level]).hash(&mut h);
                for s in (0..self.spec.n).filter(|&s| keep(s)) {
                    self.level_seen[level * self.spec.n + s].hash(&mut h);
                }
            }
        }
    }

    fn g6_open(&self) -> bool {
        if self.spec.refinement == 1 {
            self.decision.is_none()
        } else {
            self.sent_level[2].is_none()
        }
    }

    fn g7_open(&self) -> bool {
        self.spec.refinement == 2 && self.sent_level[3].is_none()
    }

    fn g8_open(&self) -> bool {
        self.spec.refinement == 2 && self.decision.is_none()
    }

    /// Whether the counter for ECHO at `slot` can still influence a guard.
    fn echo_live(&self, slot: usize) -> bool {
        let approved = self.approved.iter().filter(|&&a| a).count();
        let split_open = (self.g6_open() || self.g7_open() || self.g8_open()) && !self.split_evidence();
        let approvals_open =
            self.sent_level[0].is_none() || (self.sent_level[1].is_none() && approved <= 1) || split_open;
        !self.sent_echo[slot] || !self.sent_echo[self.bottom()] || (!self.approved[slot] && approvals_open)
    }

    /// Whether the counters of echo level `level + 2` can still influence
    /// a guard.
    fn level_live(&self, level: usize) -> bool {
        match level {
            0 => self.sent_level[1].is_none(),
            1 => self.g6_open(),
            2 => self.g7_open() || self.g8_open(),
            _ => self.g8_open(),
        }
    }

    /// Whether delivering `m` could still change any future output. Once
    /// false it stays false.
    pub(super) fn is_relevant(&self, m: &Message) -> bool {
        match level_index(m.kind) {
            None => self.echo_live(m.value.slot(self.spec.value_count)),
            Some(l) => self.level_live(l),
        }
    }

    fn slots(&self) -> usize {
        self.spec.value_count + 1
    }

    fn bottom(&self) -> usize {
        self.spec.value_count
    }

    fn sym(&self, slot: usize) -> BranchValue {
        BranchValue::from_slot(slot, self.spec.value_count)
    }

    fn quorum(&self) -> u32 {
        (self.spec.n - self.spec.f) as u32
    }

    fn amplify(&self) -> u32 {
        (self.spec.f + 1) as u32
    }

    /// Approved values, in slot order.
    pub fn approved(&self) -> Vec<BranchValue> {
        (0..self.slots())
            .filter(|&s| self.approved[s])
            .map(|s| self.sym(s))
            .collect()
    }

    pub fn echo_count(&self, value: BranchValue) -> u32 {
        self.num_echo[value.slot(self.spec.value_count)]
    }

    /// Count of received messages of an echo level 2..=5 for `value`.
    pub fn level_count(&self, kind: MsgKind, value: BranchValue) -> u32 {
        let l = level_index(kind).expect("ECHO2..ECHO5");
        self.num_level[l][value.slot(self.spec.value_count)]
    }

    pub fn sent_echo(&self, value: BranchValue) -> bool {
        self.sent_echo[value.slot(self.spec.value_count)]
    }

    /// The value this process sent at an echo level 2..=5, if it has.
    pub fn sent_at_level(&self, kind: MsgKind) -> Option<BranchValue> {
        self.sent_level[level_index(kind).expect("ECHO2..ECHO5")]
    }

    /// Two approved values, or `⊥` approved.
    fn split_evidence(&self) -> bool {
        self.approved[self.bottom()] || self.approved.iter().filter(|&&a| a).count() > 1
    }

    fn send_echo(&mut self, slot: usize, out: &mut StepOutput) {
        self.sent_echo[slot] = true;
        out.broadcast(Message::new(MsgKind::Echo, self.sym(slot), self.id));
    }

    fn send_level(&mut self, kind: MsgKind, slot: usize, out: &mut StepOutput) {
        let l = level_index(kind).expect("ECHO2..ECHO5");
        debug_assert!(self.sent_level[l].is_none());
        let value = self.sym(slot);
        self.sent_level[l] = Some(value);
        out.broadcast(Message::new(kind, value, self.id));
    }

    fn decide(&mut self, d: Vertex, out: &mut StepOutput) {
        debug_assert!(self.decision.is_none());
        self.decision = Some(d);
        out.decision = Some(d);
    }

    fn vertex_for(&self, slot: usize, grade: u8) -> Vertex {
        match self.sym(slot) {
            BranchValue::Val(v) => Vertex::on_branch(v, grade),
            BranchValue::Bottom => Vertex::CENTER,
        }
    }

    /// G1: amplify any value seen `f + 1` times.
    fn g1_amplify(&mut self, out: &mut StepOutput) -> bool {
        let mut fired = false;
        for s in 0..self.slots() {
            if !self.sent_echo[s] && self.num_echo[s] >= self.amplify() {
                self.send_echo(s, out);
                fired = true;
            }
        }
        fired
    }

    /// G2: `f + 1` echoes outside the most frequent value start `⊥`.
    fn g2_disagreement(&mut self, out: &mut StepOutput) -> bool {
        let bot = self.bottom();
        if self.sent_echo[bot] {
            return false;
        }
        let sum: u32 = self.num_echo.iter().sum();
        let max = self.num_echo.iter().copied().max().unwrap_or(0);
        if sum - max >= self.amplify() {
            self.send_echo(bot, out);
            return true;
        }
        false
    }

    /// G3: approve values echoed by a quorum; announce the first one.
    fn g3_approve(&mut self, out: &mut StepOutput) -> bool {
        let mut fired = false;
        for s in 0..self.slots() {
            if !self.approved[s] && self.num_echo[s] >= self.quorum() {
                self.approved[s] = true;
                if self.sent_level[0].is_none() {
                    self.send_level(MsgKind::Echo2, s, out);
                }
                fired = true;
            }
        }
        fired
    }

    /// G4: two approved values send `ECHO3(⊥)`.
    fn g4_split(&mut self, out: &mut StepOutput) -> bool {
        if self.sent_level[1].is_none() && self.approved.iter().filter(|&&a| a).count() > 1 {
            self.send_level(MsgKind::Echo3, self.bottom(), out);
            return true;
        }
        false
    }

    /// G5: a quorum of `ECHO2(v)` sends `ECHO3(v)`.
    fn g5_confirm(&mut self, out: &mut StepOutput) -> bool {
        if self.sent_level[1].is_some() {
            return false;
        }
        let q = self.quorum();
        if let Some(s) = self.num_level[0].iter().position(|&c| c >= q) {
            self.send_level(MsgKind::Echo3, s, out);
            return true;
        }
        false
    }

    /// G6: the R = 1 decision, or the matching `ECHO4` for R = 2.
    fn g6_third_level(&mut self, out: &mut StepOutput) -> bool {
        let r1 = self.spec.refinement == 1;
        let open = if r1 {
            self.decision.is_none()
        } else {
            self.sent_level[2].is_none()
        };
        if !open {
            return false;
        }
        let q = self.quorum();
        let echo3 = &self.num_level[1];
        let slot = if echo3.iter().sum::<u32>() >= q && self.split_evidence() {
            Some(self.bottom())
        } else {
            echo3.iter().position(|&c| c >= q)
        };
        let Some(s) = slot else {
            return false;
        };
        if r1 {
            let d = self.vertex_for(s, 1);
            self.decide(d, out);
        } else {
            self.send_level(MsgKind::Echo4, s, out);
        }
        true
    }

    /// G7: forward a quorum `ECHO4` value, or `⊥` on split evidence.
    fn g7_fourth_level(&mut self, out: &mut StepOutput) -> bool {
        if self.sent_level[3].is_some() {
            return false;
        }
        let q = self.quorum();
        let echo4 = &self.num_level[2];
        let slot = match echo4.iter().position(|&c| c >= q) {
            Some(s) => Some(s),
            None if echo4.iter().sum::<u32>() >= q && self.split_evidence() => Some(self.bottom()),
            None => None,
        };
        if let Some(s) = slot {
            self.send_level(MsgKind::Echo5, s, out);
            return true;
        }
        false
    }

    /// G8: the R = 2 decision from `ECHO5`.
    fn g8_decide(&mut self, out: &mut StepOutput) -> bool {
        if self.spec.refinement != 2 || self.decision.is_some() {
            return false;
        }
        let q = self.quorum();
        let k = self.spec.value_count;
        let echo4 = &self.num_level[2];
        let echo5 = &self.num_level[3];
        let d = if let Some(v) = echo5[..k].iter().position(|&c| c >= q) {
            Some(self.vertex_for(v, 2))
        } else if echo5.iter().sum::<u32>() >= q && self.split_evidence() {
            (0..k)
                .find(|&w| echo5[w] >= 1 && echo4[w] >= self.amplify())
                .map(|w| self.vertex_for(w, 1))
        } else {
            None
        };
        let d = d.or_else(|| (echo5[k] >= q).then_some(Vertex::CENTER));
        match d {
            Some(d) => {
                self.decide(d, out);
                true
            }
            None => false,
        }
    }

    fn settle(&mut self, out: &mut StepOutput) {
        loop {
            let mut fired = self.g1_amplify(out);
            fired |= self.g2_disagreement(out);
            fired |= self.g3_approve(out);
            fired |= self.g4_split(out);
            fired |= self.g5_confirm(out);
            fired |= self.g6_third_level(out);
            fired |= self.g7_fourth_level(out);
            fired |= self.g8_decide(out);
            if !fired {
                break;
            }
        }
    }
}

impl ProcessMachine for EchoCc {
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
                self.send_echo(self.input.index(), &mut out);
                return Ok(out);
            }
            Event::Deliver(m) => m,
        };
        if !self.awake {
            return Err(ProtocolError::NotAwake(self.id));
        }
        validate_message(ProtocolKind::EchoCc, &self.spec, m)?;
        if self.is_duplicate(m) {
            return Ok(out);
        }
        let slot = m.value.slot(self.spec.value_count);
        match level_index(m.kind) {
            None => {
                let slots = self.slots();
                self.echo_seen[m.sender.0 * slots + slot] = true;
                self.num_echo[slot] += 1;
            }
            Some(l) => {
                self.level_seen[l * self.spec.n + m.sender.0] = true;
                self.num_level[l][slot] += 1;
            }
        }
        self.settle(&mut out);
        Ok(out)
    }

    fn decision(&self) -> Option<Vertex> {
        self.decision
    }

    fn is_duplicate(&self, m: &Message) -> bool {
        match level_index(m.kind) {
            None if m.kind == MsgKind::Echo => {
                let slot = m.value.slot(self.spec.value_count);
                self.echo_seen
                    .get(m.sender.0 * self.slots() + slot)
                    .copied()
                    .unwrap_or(false)
            }
            None => false,
            Some(l) => self.level_seen[l * self.spec.n + m.sender.0],
        }
    }

    fn is_finished(&self) -> bool {
        let levels = if self.spec.refinement == 1 { 2 } else { LEVELS };
        self.decision.is_some()
            && self.sent_echo.iter().all(|&s| s)
            && self.sent_level[..levels].iter().all(Option::is_some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::testutil::{deliver, val};
    use crate::spider::FailureModel;

    const BOT: BranchValue = BranchValue::Bottom;

    fn machine(n: usize, f: usize, k: usize, r: u8, input: u16) -> EchoCc {
        let spec = TaskSpec::new(k, r, n, f, FailureModel::Malicious).unwrap();
        let mut m = EchoCc::try_new(&spec, ProcessId(0), Value(input)).unwrap();
        m.step(&Event::Wakeup).unwrap();
        m
    }

    fn sent(out: &StepOutput) -> Vec<(MsgKind, BranchValue)> {
        out.outgoing
            .iter()
            .map(|o| (o.message.kind, o.message.value))
            .collect()
    }

    #[test]
    fn wakeup_echoes_input() {
        let spec = TaskSpec::new(3, 1, 4, 1, FailureModel::Malicious).unwrap();
        let mut m = EchoCc::try_new(&spec, ProcessId(0), Value(2)).unwrap();
        let out = m.step(&Event::Wakeup).unwrap();
        assert_eq!(sent(&out), vec![(MsgKind::Echo, val(2))]);
        assert!(m.sent_echo(val(2)));
    }

    #[test]
    fn disagreement_starts_bottom_echo() {
        // num_echo = {0:1, 1:1, 2:1}: sum - max = 2 >= f + 1.
        let mut m = machine(4, 1, 3, 1, 0);
        assert!(sent(&m.step(&deliver(MsgKind::Echo, val(0), 0)).unwrap()).is_empty());
        assert!(sent(&m.step(&deliver(MsgKind::Echo, val(1), 1)).unwrap()).is_empty());
        let out = m.step(&deliver(MsgKind::Echo, val(2), 2)).unwrap();
        assert_eq!(sent(&out), vec![(MsgKind::Echo, BOT)]);
        assert!(m.sent_echo(BOT));
    }

    #[test]
    fn amplification_fires_once_at_f_plus_one() {
        let mut m = machine(4, 1, 2, 1, 0);
        m.step(&deliver(MsgKind::Echo, val(1), 1)).unwrap();
        let out = m.step(&deliver(MsgKind::Echo, val(1), 2)).unwrap();
        assert_eq!(sent(&out), vec![(MsgKind::Echo, val(1))]);
        let out = m.step(&deliver(MsgKind::Echo, val(1), 3)).unwrap();
        // Third copy approves 1 rather than re-echoing.
        assert_eq!(sent(&out), vec![(MsgKind::Echo2, val(1))]);
        assert_eq!(m.approved(), vec![val(1)]);
    }

    #[test]
    fn duplicate_echoes_are_not_counted() {
        let mut m = machine(4, 1, 2, 1, 0);
        m.step(&deliver(MsgKind::Echo, val(1), 3)).unwrap();
        assert!(m.step(&deliver(MsgKind::Echo, val(1), 3)).unwrap().is_empty());
        assert_eq!(m.echo_count(val(1)), 1);
        // A different value from the same sender is a distinct echo.
        m.step(&deliver(MsgKind::Echo, val(0), 3)).unwrap();
        assert_eq!(m.echo_count(val(0)), 1);
        m.step(&deliver(MsgKind::Echo2, val(0), 3)).unwrap();
        assert!(m.step(&deliver(MsgKind::Echo2, val(1), 3)).unwrap().is_empty());
        assert_eq!(m.level_count(MsgKind::Echo2, val(1)), 0);
    }

    #[test]
    fn unanimous_run_decides_leaf_r1() {
        let mut m = machine(4, 1, 2, 1, 0);
        let mut kinds = Vec::new();
        let mut decision = None;
        for kind in [MsgKind::Echo, MsgKind::Echo2, MsgKind::Echo3] {
            for s in 0..3 {
                let out = m.step(&deliver(kind, val(0), s)).unwrap();
                kinds.extend(sent(&out));
                decision = decision.or(out.decision);
            }
        }
        assert_eq!(kinds, vec![(MsgKind::Echo2, val(0)), (MsgKind::Echo3, val(0))]);
        assert_eq!(decision, Some(Vertex::on_branch(Value(0), 1)));
    }

    #[test]
    fn echo5_quorum_commits() {
        let mut m = machine(4, 1, 2, 2, 1);
        let mut decision = None;
        for s in 1..4 {
            decision = decision.or(m.step(&deliver(MsgKind::Echo5, val(1), s)).unwrap().decision);
        }
        assert_eq!(decision, Some(Vertex::on_branch(Value(1), 2)));
    }

    #[test]
    fn split_approval_decides_center_r1() {
        let mut m = machine(4, 1, 2, 1, 0);
        for s in 0..3 {
            m.step(&deliver(MsgKind::Echo, val(0), s)).unwrap();
        }
        let mut all = Vec::new();
        for s in 1..4 {
            all.extend(sent(&m.step(&deliver(MsgKind::Echo, val(1), s)).unwrap()));
        }
        assert!(all.contains(&(MsgKind::Echo3, BOT)));
        let mut decision = None;
        for (s, v) in [(0, BOT), (1, val(0)), (2, BOT)] {
            decision = decision.or(m.step(&deliver(MsgKind::Echo3, v, s)).unwrap().decision);
        }
        assert_eq!(decision, Some(Vertex::CENTER));
    }

    #[test]
    fn adopt_needs_echo4_support() {
        // R = 2: split evidence, ECHO5 quorum mixing ⊥ and 1, and f + 1
        // ECHO4(1) lets the process adopt 1.
        let mut m = machine(4, 1, 2, 2, 0);
        for s in 0..3 {
            m.step(&deliver(MsgKind::Echo, val(0), s)).unwrap();
            m.step(&deliver(MsgKind::Echo, BOT, s)).unwrap();
        }
        assert!(m.approved().contains(&BOT));
        for s in 1..3 {
            m.step(&deliver(MsgKind::Echo4, val(1), s)).unwrap();
        }
        let mut decision = None;
        for (s, v) in [(0, BOT), (1, val(1)), (2, BOT)] {
            decision = decision.or(m.step(&deliver(MsgKind::Echo5, v, s)).unwrap().decision);
        }
        assert_eq!(decision, Some(Vertex::on_branch(Value(1), 1)));
    }

    #[test]
    fn keeps_relaying_after_decision() {
        let mut m = machine(4, 1, 2, 1, 0);
        for s in 1..4 {
            m.step(&deliver(MsgKind::Echo3, val(1), s)).unwrap();
        }
        assert_eq!(m.decision(), Some(Vertex::on_branch(Value(1), 1)));
        m.step(&deliver(MsgKind::Echo, val(1), 1)).unwrap();
        let out = m.step(&deliver(MsgKind::Echo, val(1), 2)).unwrap();
        assert_eq!(sent(&out), vec![(MsgKind::Echo, val(1))]);
        assert!(out.decision.is_none());
    }

    #[test]
    fn foreign_kinds_rejected() {
        let mut m = machine(4, 1, 2, 1, 0);
        assert!(matches!(
            m.step(&deliver(MsgKind::Input, val(0), 1)),
            Err(ProtocolError::ForeignMessage { .. })
        ));
        assert!(matches!(
            m.step(&deliver(MsgKind::Echo, val(5), 1)),
            Err(ProtocolError::Malformed(_))
        ));
    }
}
