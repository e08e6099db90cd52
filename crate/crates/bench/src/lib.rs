//! Shared fixtures for the benchmarks.

use cc_core::{FailureModel, ProtocolKind, SimTime, TaskSpec, Value};

/// A resilient `(n, f)` pair and failure model for each protocol.
pub fn instance(protocol: ProtocolKind, refinement: u8) -> TaskSpec {
    let (n, f, model) = match protocol {
        ProtocolKind::CrashCc => (5, 2, FailureModel::Crash),
        ProtocolKind::TrimCc => (6, 1, FailureModel::Malicious),
        ProtocolKind::EchoCc => (4, 1, FailureModel::Malicious),
        ProtocolKind::OneRoundCrash => (9, 2, FailureModel::Crash),
        ProtocolKind::OneRoundByz => (13, 1, FailureModel::Malicious),
    };
    TaskSpec::new(2, refinement, n, f, model).expect("valid instance")
}

/// Alternating 0/1 inputs.
pub fn split_inputs(n: usize) -> Vec<Value> {
    (0..n).map(|i| Value((i % 2) as u16)).collect()
}

pub fn delays() -> Vec<SimTime> {
    vec![SimTime::new(1, 4), SimTime::new(1, 2), SimTime::ONE]
}
