//! Event-driven connected consensus state machines.
//!
//! Every protocol is a pure state transformer: a machine consumes one
//! [`Event`] at a time and answers with a [`StepOutput`] listing the messages
//! to send and at most one decision over its lifetime. Machines never read a
//! clock; all timing lives in the simulator.
//!
//! Five protocols are provided:
//!
//! * [`CrashCc`]: one or two rounds of exchange, crash faults, `n > 2f`.
//! * [`TrimCc`]: the same skeleton with trimming of extreme inputs and
//!   Byzantine-proof thresholds, malicious faults, `n > 5f`.
//! * [`EchoCc`]: five (R=1) or seven (R=2) levels of echo messages,
//!   malicious faults, `n > 3f`.
//! * [`OneRoundCc`] in crash mode: a single exchange for `R = 2`, `n > 4f`.
//! * [`OneRoundCc`] in Byzantine mode: a single trimmed exchange for `R = 2`,
//!   `n > 12f` (binding from `n > 13f`).

mod crash;
mod echo;
mod oneround;
mod trim;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use thiserror::Error;

pub use crash::CrashCc;
pub use echo::EchoCc;
pub use oneround::OneRoundCc;
pub use trim::TrimCc;

use crate::spider::{BranchValue, FailureModel, TaskSpec, Value, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcessId(pub usize);

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MsgKind {
    Input,
    Branch,
    Echo,
    Echo2,
    Echo3,
    Echo4,
    Echo5,
}

impl MsgKind {
    pub const ALL: [MsgKind; 7] = [
        MsgKind::Input,
        MsgKind::Branch,
        MsgKind::Echo,
        MsgKind::Echo2,
        MsgKind::Echo3,
        MsgKind::Echo4,
        MsgKind::Echo5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MsgKind::Input => "INPUT",
            MsgKind::Branch => "BRANCH",
            MsgKind::Echo => "ECHO",
            MsgKind::Echo2 => "ECHO2",
            MsgKind::Echo3 => "ECHO3",
            MsgKind::Echo4 => "ECHO4",
            MsgKind::Echo5 => "ECHO5",
        }
    }

    /// Echo level 2..=5 for the higher echo kinds.
    fn echo_level(self) -> Option<usize> {
        match self {
            MsgKind::Echo2 => Some(2),
            MsgKind::Echo3 => Some(3),
            MsgKind::Echo4 => Some(4),
            MsgKind::Echo5 => Some(5),
            _ => None,
        }
    }
}

impl fmt::Display for MsgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MsgKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MsgKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown message kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    pub kind: MsgKind,
    pub value: BranchValue,
    pub sender: ProcessId,
}

impl Message {
    pub fn new(kind: MsgKind, value: BranchValue, sender: ProcessId) -> Self {
        Message {
            kind,
            value,
            sender,
        }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} from {}", self.kind, self.value, self.sender)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Wakeup,
    Deliver(Message),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destinations {
    All,
    Only(Vec<ProcessId>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub to: Destinations,
    pub message: Message,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepOutput {
    pub outgoing: Vec<Outgoing>,
    pub decision: Option<Vertex>,
}

impl StepOutput {
    fn broadcast(&mut self, message: Message) {
        self.outgoing.push(Outgoing {
            to: Destinations::All,
            message,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.outgoing.is_empty() && self.decision.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("{protocol} does not handle {kind} messages")]
    ForeignMessage {
        protocol: ProtocolKind,
        kind: MsgKind,
    },
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("process {0} woke up twice")]
    DuplicateWakeup(ProcessId),
    #[error("process {0} received a message before waking up")]
    NotAwake(ProcessId),
    #[error("{protocol} needs n > {factor}f, got n={n}, f={f}")]
    Underresilient {
        protocol: ProtocolKind,
        factor: usize,
        n: usize,
        f: usize,
    },
    #[error("{protocol} needs the {expected} failure model")]
    WrongFailureModel {
        protocol: ProtocolKind,
        expected: FailureModel,
    },
    #[error("{protocol} does not support refinement R={refinement}")]
    UnsupportedRefinement { protocol: ProtocolKind, refinement: u8 },
    #[error("process id {id} out of range for n={n}")]
    BadProcess { id: usize, n: usize },
    #[error("input {value} outside the value set of size {value_count}")]
    BadInput { value: u16, value_count: usize },
}

/// A per-process protocol state machine.
pub trait ProcessMachine {
    fn id(&self) -> ProcessId;

    /// Consumes one event.
    ///
    /// Duplicates (per the dedup ledger) are dropped silently, and once a
    /// decision has been emitted no further decision ever is.
    fn step(&mut self, event: &Event) -> Result<StepOutput, ProtocolError>;

    fn decision(&self) -> Option<Vertex>;

    /// Whether `message` would be dropped by the dedup ledger.
    fn is_duplicate(&self, message: &Message) -> bool;

    /// True once no future event can produce output.
    fn is_finished(&self) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProtocolKind {
    CrashCc,
    TrimCc,
    EchoCc,
    OneRoundCrash,
    OneRoundByz,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 5] = [
        ProtocolKind::CrashCc,
        ProtocolKind::TrimCc,
        ProtocolKind::EchoCc,
        ProtocolKind::OneRoundCrash,
        ProtocolKind::OneRoundByz,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::CrashCc => "crash_cc",
            ProtocolKind::TrimCc => "trim_cc",
            ProtocolKind::EchoCc => "echo_cc",
            ProtocolKind::OneRoundCrash => "oneround_crash",
            ProtocolKind::OneRoundByz => "oneround_byz",
        }
    }

    pub fn failure_model(self) -> FailureModel {
        match self {
            ProtocolKind::CrashCc | ProtocolKind::OneRoundCrash => FailureModel::Crash,
            _ => FailureModel::Malicious,
        }
    }

    /// `n` must exceed `factor * f`.
    pub fn resilience_factor(self) -> usize {
        match self {
            ProtocolKind::CrashCc => 2,
            ProtocolKind::TrimCc => 5,
            ProtocolKind::EchoCc => 3,
            ProtocolKind::OneRoundCrash => 4,
            ProtocolKind::OneRoundByz => 12,
        }
    }

    pub fn supports_refinement(self, refinement: u8) -> bool {
        match self {
            ProtocolKind::OneRoundCrash | ProtocolKind::OneRoundByz => refinement == 2,
            _ => (1..=2).contains(&refinement),
        }
    }

    /// Message kinds the protocol exchanges for the given refinement.
    pub fn kinds(self, refinement: u8) -> &'static [MsgKind] {
        use MsgKind::*;
        match (self, refinement) {
            (ProtocolKind::CrashCc | ProtocolKind::TrimCc, 1) => &[Input],
            (ProtocolKind::CrashCc | ProtocolKind::TrimCc, _) => &[Input, Branch],
            (ProtocolKind::EchoCc, 1) => &[Echo, Echo2, Echo3],
            (ProtocolKind::EchoCc, _) => &[Echo, Echo2, Echo3, Echo4, Echo5],
            (ProtocolKind::OneRoundCrash | ProtocolKind::OneRoundByz, _) => &[Input],
        }
    }

    /// Whether the dedup ledger admits one message per value (rather than
    /// one per kind) from each sender.
    pub fn dedup_per_value(kind: MsgKind) -> bool {
        kind == MsgKind::Echo
    }

    /// Whether the locked branch is a function of the input assignment alone.
    pub fn is_input_determined(self) -> bool {
        self != ProtocolKind::EchoCc
    }

    /// Upper bound on broadcasts by one correct process.
    pub fn broadcast_budget(self, spec: &TaskSpec) -> usize {
        match self {
            ProtocolKind::EchoCc => spec.value_count + 5,
            _ => spec.refinement as usize,
        }
    }

    /// Validates the protocol against an instance.
    pub fn check(self, spec: &TaskSpec, allow_underresilient: bool) -> Result<(), ProtocolError> {
        if spec.failure_model != self.failure_model() {
            return Err(ProtocolError::WrongFailureModel {
                protocol: self,
                expected: self.failure_model(),
            });
        }
        if !self.supports_refinement(spec.refinement) {
            return Err(ProtocolError::UnsupportedRefinement {
                protocol: self,
                refinement: spec.refinement,
            });
        }
        let factor = self.resilience_factor();
        if !allow_underresilient && spec.n <= factor * spec.f {
            return Err(ProtocolError::Underresilient {
                protocol: self,
                factor,
                n: spec.n,
                f: spec.f,
            });
        }
        Ok(())
    }

    /// Builds the machine for process `id` with the given input.
    pub fn build(
        self,
        spec: &TaskSpec,
        id: ProcessId,
        input: Value,
        options: BuildOptions,
    ) -> Result<Machine, ProtocolError> {
        self.check(spec, options.allow_underresilient)?;
        if id.0 >= spec.n {
            return Err(ProtocolError::BadProcess { id: id.0, n: spec.n });
        }
        if input.index() >= spec.value_count {
            return Err(ProtocolError::BadInput {
                value: input.0,
                value_count: spec.value_count,
            });
        }
        Ok(match self {
            ProtocolKind::CrashCc => {
                Machine::Crash(CrashCc::new(spec, id, input, options.mutation))
            }
            ProtocolKind::TrimCc => Machine::Trim(TrimCc::new(spec, id, input)),
            ProtocolKind::EchoCc => Machine::Echo(EchoCc::new(spec, id, input)),
            ProtocolKind::OneRoundCrash => Machine::OneRound(OneRoundCc::crash(spec, id, input)),
            ProtocolKind::OneRoundByz => {
                Machine::OneRound(OneRoundCc::byzantine(spec, id, input))
            }
        })
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!(
                    "unknown protocol `{s}` (expected one of crash_cc, trim_cc, echo_cc, oneround_crash, oneround_byz)"
                )
            })
    }
}

/// Deliberate protocol defects, used to check that the harness notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// `crash_cc` takes its own input as branch instead of `⊥` when the
    /// first round is not unanimous.
    BranchFromOwnInput,
}

impl FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "branch_from_own_input" => Ok(Mutation::BranchFromOwnInput),
            _ => Err(format!("unknown mutation `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildOptions {
    pub allow_underresilient: bool,
    pub mutation: Option<Mutation>,
}

/// Any of the five protocol machines.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Machine {
    Crash(CrashCc),
    Trim(TrimCc),
    Echo(EchoCc),
    OneRound(OneRoundCc),
}

impl Machine {
    /// Hashes the state with the process's own id, the identities of
    /// senders outside `keep`, arrival orders and counters that can no
    /// longer matter all forgotten. Two machines with equal abstract hashes
    /// respond alike to every future event from such senders, up to the
    /// sender field of what they send.
    pub(crate) fn hash_abstract(&self, h: &mut dyn Hasher, keep: &dyn Fn(usize) -> bool) {
        match self {
            Machine::Crash(m) => {
                0u8.hash(&mut &mut *h);
                m.0.hash_abstract(h, keep);
            }
            Machine::Trim(m) => {
                1u8.hash(&mut &mut *h);
                m.0.hash_abstract(h, keep);
            }
            Machine::Echo(m) => m.hash_abstract(h, keep),
            Machine::OneRound(m) => m.hash_abstract(h, keep),
        }
    }

    /// True when the state reached after a set of deliveries that produce
    /// no output does not depend on their order. The two-round machines
    /// keep only the first `n - f` reports, so for them it can.
    pub(crate) fn silent_sets_commute(&self) -> bool {
        matches!(self, Machine::Echo(_) | Machine::OneRound(_))
    }

    /// Whether delivering `message` could still change any future output.
    pub(crate) fn is_relevant(&self, message: &Message) -> bool {
        match self {
            Machine::Echo(m) => m.is_relevant(message),
            _ => !self.is_finished(),
        }
    }

    fn inner(&self) -> &dyn ProcessMachine {
        match self {
            Machine::Crash(m) => m,
            Machine::Trim(m) => m,
            Machine::Echo(m) => m,
            Machine::OneRound(m) => m,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn ProcessMachine {
        match self {
            Machine::Crash(m) => m,
            Machine::Trim(m) => m,
            Machine::Echo(m) => m,
            Machine::OneRound(m) => m,
        }
    }
}

impl ProcessMachine for Machine {
    fn id(&self) -> ProcessId {
        self.inner().id()
    }

    fn step(&mut self, event: &Event) -> Result<StepOutput, ProtocolError> {
        self.inner_mut().step(event)
    }

    fn decision(&self) -> Option<Vertex> {
        self.inner().decision()
    }

    fn is_duplicate(&self, message: &Message) -> bool {
        self.inner().is_duplicate(message)
    }

    fn is_finished(&self) -> bool {
        self.inner().is_finished()
    }
}

/// Shared sanity checks for a delivered message.
fn validate_message(
    protocol: ProtocolKind,
    spec: &TaskSpec,
    message: &Message,
) -> Result<(), ProtocolError> {
    if message.sender.0 >= spec.n {
        return Err(ProtocolError::BadProcess {
            id: message.sender.0,
            n: spec.n,
        });
    }
    let allowed = match protocol {
        ProtocolKind::EchoCc => message.kind.echo_level().is_some() || message.kind == MsgKind::Echo,
        ProtocolKind::CrashCc | ProtocolKind::TrimCc => {
            matches!(message.kind, MsgKind::Input | MsgKind::Branch)
        }
        ProtocolKind::OneRoundCrash | ProtocolKind::OneRoundByz => message.kind == MsgKind::Input,
    };
    if !allowed {
        return Err(ProtocolError::ForeignMessage {
            protocol,
            kind: message.kind,
        });
    }
    match message.value {
        BranchValue::Bottom if message.kind == MsgKind::Input => Err(ProtocolError::Malformed(
            format!("INPUT from {} carries bot", message.sender),
        )),
        BranchValue::Val(v) if v.index() >= spec.value_count => Err(ProtocolError::Malformed(
            format!("value {v} outside the value set"),
        )),
        _ => Ok(()),
    }
}

/// The smallest value whose count reaches `threshold`, if any.
fn first_reaching(counts: &[usize], threshold: usize) -> Option<Value> {
    counts
        .iter()
        .position(|&c| c >= threshold)
        .map(|i| Value(i as u16))
}
