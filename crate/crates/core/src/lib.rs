//! Connected consensus: crusader agreement, adopt-commit and graded
//! broadcast generalized to multi-valued inputs on spider graphs.
//!
//! The crate provides the protocol state machines ([`protocols`]), a
//! deterministic discrete-event simulator with exact rational time
//! ([`simnet`]), adversary policies including an exhaustive binding explorer
//! ([`adversaries`], [`adversaries::explorer`]), checkers for the correctness conditions
//! and complexity budgets ([`verify`]), and the centerless and approximate
//! agreement reductions ([`reductions`]).

pub mod adversaries;
pub mod protocols;
pub mod reductions;
pub mod simnet;
pub mod spider;
pub mod verify;

pub use protocols::{
    BuildOptions, Event, Machine, Message, MsgKind, ProcessId, ProcessMachine, ProtocolError,
    ProtocolKind, StepOutput,
};
pub use spider::{BranchValue, FailureModel, SpiderGraph, Subtree, TaskSpec, Value, Vertex};
pub use adversaries::{AdversaryPolicy, ByzEquivocator, ByzStrategy, FixedDelay, RandomCrash};
pub use simnet::{run, ExecutionTrace, SimConfig, SimError, SimTime};
pub use verify::{Outcome, Verdict};
