//! Post-hoc checkers over execution traces.
//!
//! Every checker is a pure function of its arguments and returns a
//! [`Verdict`]; a failing verdict always names what went wrong.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::protocols::{MsgKind, ProcessId, ProtocolKind};
use crate::simnet::{ExecutionTrace, SimTime};
use crate::spider::{BranchValue, SpiderGraph, Value, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub property: String,
    pub outcome: Outcome,
    pub witness: Option<String>,
}

impl Verdict {
    pub fn pass(property: &str) -> Verdict {
        Verdict {
            property: property.to_owned(),
            outcome: Outcome::Pass,
            witness: None,
        }
    }

    pub fn fail(property: &str, witness: impl Into<String>) -> Verdict {
        Verdict {
            property: property.to_owned(),
            outcome: Outcome::Fail,
            witness: Some(witness.into()),
        }
    }

    pub fn inconclusive(property: &str, why: impl Into<String>) -> Verdict {
        Verdict {
            property: property.to_owned(),
            outcome: Outcome::Inconclusive,
            witness: Some(why.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "prop={} result={} witness={}",
            self.property,
            self.outcome,
            self.witness.as_deref().unwrap_or("-")
        )
    }
}

/// The trace checkers the CLI can request by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    Termination,
    Validity,
    Agreement,
    Time,
    Messages,
    Budget,
    Echo3,
    Conformance,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Termination,
        Check::Validity,
        Check::Agreement,
        Check::Time,
        Check::Messages,
        Check::Budget,
        Check::Echo3,
        Check::Conformance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Check::Termination => "termination",
            Check::Validity => "validity",
            Check::Agreement => "agreement",
            Check::Time => "time",
            Check::Messages => "messages",
            Check::Budget => "budget",
            Check::Echo3 => "echo3",
            Check::Conformance => "conformance",
        }
    }

    pub fn run(self, trace: &ExecutionTrace) -> Verdict {
        match self {
            Check::Termination => check_termination(trace),
            Check::Validity => check_validity(trace),
            Check::Agreement => check_agreement(trace),
            Check::Time => check_time_bound(
                trace,
                time_bound(trace.protocol, trace.spec.refinement),
            ),
            Check::Messages => check_message_bound(trace),
            Check::Budget => check_broadcast_budget(trace),
            Check::Echo3 => check_echo3_uniqueness(trace),
            Check::Conformance => match trace.check_conformance() {
                Ok(()) => Verdict::pass("conformance"),
                Err(e) => Verdict::fail("conformance", e),
            },
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Check::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown check `{s}`"))
    }
}

/// Runs every check in [`Check::ALL`].
pub fn check_all(trace: &ExecutionTrace) -> Vec<Verdict> {
    Check::ALL.iter().map(|c| c.run(trace)).collect()
}

pub fn check_termination(trace: &ExecutionTrace) -> Verdict {
    const NAME: &str = "termination";
    let graph = trace.spec.graph();
    let mut counts = vec![0usize; trace.spec.n];
    for r in &trace.records {
        if let Some(d) = r.decision {
            counts[r.process.0] += 1;
            if trace.is_correct(r.process) && !graph.contains_vertex(d) {
                return Verdict::fail(NAME, format!("{} decided non-vertex {d}", r.process));
            }
        }
    }
    for p in trace.correct_processes() {
        match counts[p.0] {
            1 => {}
            0 => return Verdict::fail(NAME, format!("process {p} undecided")),
            k => return Verdict::fail(NAME, format!("process {p} decided {k} times")),
        }
    }
    Verdict::pass(NAME)
}

/// Validity over explicit arguments: every decision lies in the minimal
/// subtree spanned by `inputs`.
pub fn validity_of(
    graph: &SpiderGraph,
    inputs: &BTreeSet<Value>,
    decisions: &[(ProcessId, Vertex)],
) -> Verdict {
    const NAME: &str = "validity";
    let subtree = match graph.minimal_subtree(inputs) {
        Ok(t) => t,
        Err(e) => return Verdict::fail(NAME, e.to_string()),
    };
    match decisions.iter().find(|(_, d)| !subtree.contains(*d)) {
        Some((p, d)) => {
            let inputs: Vec<String> = inputs.iter().map(|v| v.to_string()).collect();
            Verdict::fail(
                NAME,
                format!("{p} decided {d} outside the subtree of {{{}}}", inputs.join(",")),
            )
        }
        None => Verdict::pass(NAME),
    }
}

/// Agreement over explicit arguments: decisions are pairwise adjacent or
/// equal.
pub fn agreement_of(graph: &SpiderGraph, decisions: &[(ProcessId, Vertex)]) -> Verdict {
    const NAME: &str = "agreement";
    for (i, &(p, a)) in decisions.iter().enumerate() {
        for &(q, b) in &decisions[i + 1..] {
            match graph.distance(a, b) {
                Ok(d) if d <= 1 => {}
                Ok(d) => {
                    return Verdict::fail(NAME, format!("{p}:{a} {q}:{b} at distance {d}"));
                }
                Err(e) => return Verdict::fail(NAME, format!("{p}:{a} {q}:{b}: {e}")),
            }
        }
    }
    Verdict::pass(NAME)
}

pub fn check_validity(trace: &ExecutionTrace) -> Verdict {
    validity_of(
        &trace.spec.graph(),
        &trace.validity_inputs(),
        &trace.correct_decisions(),
    )
}

pub fn check_agreement(trace: &ExecutionTrace) -> Verdict {
    agreement_of(&trace.spec.graph(), &trace.correct_decisions())
}

/// The input value whose frequency forces the branch, for the protocols
/// where a counting rule predicts it.
pub fn counting_oracle(protocol: ProtocolKind, n: usize, f: usize, inputs: &[Value]) -> Option<Option<Value>> {
    let threshold = match protocol {
        ProtocolKind::CrashCc => n - f,
        ProtocolKind::OneRoundCrash => n - 2 * f,
        _ => return None,
    };
    let mut counts: BTreeMap<Value, usize> = BTreeMap::new();
    for &v in inputs {
        *counts.entry(v).or_default() += 1;
    }
    Some(counts.into_iter().find(|&(_, c)| c >= threshold).map(|(v, _)| v))
}

/// The non-bottom branches correct processes decided on, over all traces.
pub fn decided_branches(traces: &[ExecutionTrace]) -> BTreeSet<Value> {
    traces
        .iter()
        .flat_map(|t| t.correct_decisions())
        .filter_map(|(_, d)| d.value.value())
        .collect()
}

/// Branch determinism across traces that share an input assignment.
///
/// Passing is a necessary condition for Binding, not a certificate.
pub fn check_binding_oracle(traces: &[ExecutionTrace]) -> Verdict {
    const NAME: &str = "binding_oracle";
    let Some(first) = traces.first() else {
        return Verdict::inconclusive(NAME, "no traces");
    };
    if !first.protocol.is_input_determined() {
        return Verdict::inconclusive(NAME, format!("{} has no input-determined branch", first.protocol));
    }
    if traces
        .iter()
        .any(|t| t.inputs != first.inputs || t.protocol != first.protocol || t.spec != first.spec)
    {
        return Verdict::inconclusive(NAME, "traces do not share one instance");
    }
    let branches = decided_branches(traces);
    let shown: Vec<String> = branches.iter().map(|v| v.to_string()).collect();
    if branches.len() > 1 {
        return Verdict::fail(NAME, format!("branches {{{}}}", shown.join(",")));
    }
    let oracle = counting_oracle(first.protocol, first.spec.n, first.spec.f, &first.inputs);
    if let (Some(expected), Some(&got)) = (oracle, branches.iter().next()) {
        if expected != Some(got) {
            let expected = expected.map_or("none".to_owned(), |v| v.to_string());
            return Verdict::fail(NAME, format!("branch {got}, counting rule predicts {expected}"));
        }
    }
    Verdict::pass(NAME)
}

/// Worst-case scaled decision time of each protocol.
pub fn time_bound(protocol: ProtocolKind, refinement: u8) -> SimTime {
    match protocol {
        ProtocolKind::CrashCc | ProtocolKind::TrimCc => SimTime::from_int(i64::from(refinement)),
        ProtocolKind::EchoCc if refinement == 1 => SimTime::from_int(5),
        ProtocolKind::EchoCc => SimTime::from_int(7),
        ProtocolKind::OneRoundCrash | ProtocolKind::OneRoundByz => SimTime::ONE,
    }
}

pub fn check_time_bound(trace: &ExecutionTrace, bound: SimTime) -> Verdict {
    const NAME: &str = "time";
    match trace.scaled_decision_time() {
        Ok(t) if t <= bound => Verdict::pass(NAME),
        Ok(t) => Verdict::fail(NAME, format!("scaled time {t} exceeds {bound}")),
        Err(e) => Verdict::fail(NAME, e.to_string()),
    }
}

/// Upper bound on correct-sent point-to-point messages: each correct
/// process sends at most its broadcast budget to all `n` processes.
pub fn message_bound(trace: &ExecutionTrace) -> u64 {
    let correct = trace.correct_processes().count() as u64;
    correct * trace.spec.n as u64 * trace.protocol.broadcast_budget(&trace.spec) as u64
}

pub fn check_message_bound(trace: &ExecutionTrace) -> Verdict {
    const NAME: &str = "messages";
    let sent = trace.message_totals().correct_total();
    let bound = message_bound(trace);
    if sent <= bound {
        Verdict::pass(NAME)
    } else {
        Verdict::fail(NAME, format!("{sent} correct-sent messages exceed {bound}"))
    }
}

/// Per-process broadcast budget: each ECHO value at most once and every
/// other kind at most once.
pub fn check_broadcast_budget(trace: &ExecutionTrace) -> Verdict {
    const NAME: &str = "budget";
    let mut sent: BTreeMap<ProcessId, BTreeSet<(MsgKind, Option<BranchValue>)>> = BTreeMap::new();
    for r in trace.records.iter().filter(|r| trace.is_correct(r.process)) {
        for s in &r.sends {
            let key = (s.kind, ProtocolKind::dedup_per_value(s.kind).then_some(s.value));
            sent.entry(r.process).or_default().insert(key);
        }
    }
    let budget = trace.protocol.broadcast_budget(&trace.spec);
    match sent.iter().find(|(_, kinds)| kinds.len() > budget) {
        Some((p, kinds)) => Verdict::fail(NAME, format!("{p} made {} broadcasts, budget {budget}", kinds.len())),
        None => Verdict::pass(NAME),
    }
}

/// All values carried by correct ECHO3 messages other than bottom coincide.
pub fn check_echo3_uniqueness(trace: &ExecutionTrace) -> Verdict {
    const NAME: &str = "echo3";
    let values: BTreeSet<Value> = trace
        .records
        .iter()
        .filter(|r| trace.is_correct(r.process))
        .flat_map(|r| &r.sends)
        .filter(|s| s.kind == MsgKind::Echo3)
        .filter_map(|s| s.value.value())
        .collect();
    if values.len() <= 1 {
        Verdict::pass(NAME)
    } else {
        let shown: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        Verdict::fail(NAME, format!("ECHO3 values {{{}}}", shown.join(",")))
    }
}

/// With `R = 1`, a Binding pass must come with an Agreement pass.
pub fn check_binding_implies_agreement(binding: &Verdict, agreement: &Verdict) -> Verdict {
    const NAME: &str = "binding_implies_agreement";
    if binding.passed() && agreement.outcome == Outcome::Fail {
        Verdict::fail(
            NAME,
            format!("binding passed but {}", agreement.witness.as_deref().unwrap_or("agreement failed")),
        )
    } else {
        Verdict::pass(NAME)
    }
}
