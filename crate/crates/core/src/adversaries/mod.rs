//! Adversary policies: who is faulty, how long each message takes, where
//! crashing processes stop, and what malicious processes send.
//!
//! The simulator asks the policy for a finite delay for every message, so
//! no policy can withhold a message from a correct process forever.

mod byzantine;
pub mod explorer;
mod random_crash;
mod scripted;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::protocols::{Message, MsgKind, ProcessId, ProtocolKind, StepOutput};
use crate::simnet::SimTime;
use crate::spider::{BranchValue, TaskSpec};

pub use byzantine::{ByzEquivocator, ByzStrategy};
pub use explorer::{binding_explorer, binding_explorer_batch, ExploreError, ExplorerBounds, ExplorerReport};
pub use random_crash::RandomCrash;
pub use scripted::SlowDecision;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("scripted schedule needs {0}")]
    Script(String),
    #[error("delay menu is empty")]
    EmptyDelayMenu,
    #[error("delay {0} is not positive")]
    NonPositiveDelay(SimTime),
    #[error("crash probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("{0}")]
    Unsupported(String),
}

/// Where a crash-faulty process stops: it completes `full_broadcasts`
/// broadcasts, delivers the next one only to `partial`, and then halts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrashCut {
    pub full_broadcasts: usize,
    pub partial: Vec<ProcessId>,
}

impl CrashCut {
    /// Crashes before sending anything.
    pub fn silent() -> CrashCut {
        CrashCut {
            full_broadcasts: 0,
            partial: Vec::new(),
        }
    }
}

/// A message a malicious process delivers to `to` at time `at`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Injection {
    pub from: ProcessId,
    pub to: ProcessId,
    pub kind: MsgKind,
    pub value: BranchValue,
    pub at: SimTime,
}

pub trait AdversaryPolicy {
    /// Rejects a policy that cannot drive this instance.
    fn check(&self, _spec: &TaskSpec, _protocol: ProtocolKind) -> Result<(), AdversaryError> {
        Ok(())
    }

    fn faulty(&self) -> BTreeSet<ProcessId>;

    /// Crash point of a faulty process. A faulty process with a cut runs the
    /// protocol until the cut; without one it runs the protocol faithfully
    /// under crash faults and sends nothing of its own under malicious
    /// faults.
    fn crash_cut(&mut self, _process: ProcessId) -> Option<CrashCut> {
        None
    }

    fn delay(&mut self, from: ProcessId, to: ProcessId, message: &Message, now: SimTime) -> SimTime;

    fn initial_injections(&mut self, _spec: &TaskSpec, _protocol: ProtocolKind) -> Vec<Injection> {
        Vec::new()
    }

    /// Called after every recorded step; may react to what was sent.
    fn on_step(&mut self, _now: SimTime, _process: ProcessId, _output: &StepOutput) -> Vec<Injection> {
        Vec::new()
    }
}

/// Every message takes the same time; faulty processes are silent.
#[derive(Debug, Clone)]
pub struct FixedDelay {
    delay: SimTime,
    faulty: BTreeSet<ProcessId>,
}

impl FixedDelay {
    pub fn new(delay: SimTime) -> FixedDelay {
        FixedDelay {
            delay,
            faulty: BTreeSet::new(),
        }
    }

    pub fn with_silent(mut self, faulty: impl IntoIterator<Item = ProcessId>) -> FixedDelay {
        self.faulty = faulty.into_iter().collect();
        self
    }
}

impl AdversaryPolicy for FixedDelay {
    fn faulty(&self) -> BTreeSet<ProcessId> {
        self.faulty.clone()
    }

    fn crash_cut(&mut self, _process: ProcessId) -> Option<CrashCut> {
        Some(CrashCut::silent())
    }

    fn delay(&mut self, _: ProcessId, _: ProcessId, _: &Message, _: SimTime) -> SimTime {
        self.delay
    }
}

/// The last `f` processes, the default faulty set of the built-in policies.
pub fn last_f(spec: &TaskSpec) -> impl Iterator<Item = ProcessId> {
    (spec.n - spec.f..spec.n).map(ProcessId)
}

pub(crate) fn check_delays(delays: &[SimTime]) -> Result<(), AdversaryError> {
    if delays.is_empty() {
        return Err(AdversaryError::EmptyDelayMenu);
    }
    match delays.iter().find(|d| **d <= SimTime::ZERO) {
        Some(&d) => Err(AdversaryError::NonPositiveDelay(d)),
        None => Ok(()),
    }
}
