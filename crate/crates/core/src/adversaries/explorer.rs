//! Exhaustive check of the Binding property on small instances.
//!
//! The explorer enumerates delivery orders, ignoring timing.
//! Correct-to-correct messages are eventually delivered; messages from or
//! to crash-faulty processes may be delayed forever; a malicious process
//! may at any point deliver any message its recipient's dedup ledger would
//! still count. Every state is annotated with the set of branch values
//! decided in some extension of it. Binding holds when, at every transition
//! that produces the first correct decision, that set has at most one
//! element.
//!
//! Three reductions keep the search small:
//!
//! * A move delivers a batch of messages to one process: deliveries that
//!   produce no output, each of which changes the output of the final one.
//!   Silent deliveries can always be postponed until just before the
//!   delivery whose output they affect, and for machines whose silent
//!   deliveries commute this loses no reachable decision.
//! * Messages a machine reports as irrelevant (they can no longer change
//!   any output) are dropped, and dead counters are left out of the state
//!   hash.
//! * States are memoized by a 128-bit fingerprint in which correct senders
//!   are anonymous and correct processes are interchangeable, so symmetric
//!   states and symmetric input assignments are explored once.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use thiserror::Error;
use xxhash_rust::xxh3::{xxh3_128, xxh3_64};

use crate::protocols::{
    BuildOptions, Destinations, Event, Machine, Message, MsgKind, ProcessId, ProcessMachine,
    ProtocolError, ProtocolKind, StepOutput,
};
use crate::spider::{BranchValue, FailureModel, SpiderError, TaskSpec, Value};
use crate::verify::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExplorerBounds {
    /// Distinct states to visit before giving up.
    pub max_states: usize,
}

impl Default for ExplorerBounds {
    fn default() -> Self {
        ExplorerBounds {
            max_states: 10_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("expected {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("{got} faulty processes exceed the budget f={budget}")]
    TooManyFaults { got: usize, budget: usize },
    #[error("explorer handles at most 64 values")]
    TooManyValues,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Spec(#[from] SpiderError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplorerReport {
    pub outcome: Outcome,
    /// Distinct states visited.
    pub states: usize,
    /// Transitions into a state with the first correct decision.
    pub decision_points: usize,
    /// Every non-bottom branch some correct process decides on somewhere.
    pub reachable_branches: BTreeSet<Value>,
    /// States where some correct process is undecided and no delivery among
    /// correct processes can produce output anymore.
    pub stuck_states: usize,
    /// The delivery sequence leading to the first violation.
    pub witness: Option<String>,
}

impl fmt::Display for ExplorerReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let branches: Vec<String> = self.reachable_branches.iter().map(|v| v.to_string()).collect();
        write!(
            f,
            "outcome={} states={} decision_points={} branches={{{}}} stuck={}",
            self.outcome,
            self.states,
            self.decision_points,
            branches.join(","),
            self.stuck_states
        )
    }
}

#[derive(Clone)]
struct State {
    machines: Vec<Option<Machine>>,
    /// Sorted multiset of `(destination, message)`.
    in_flight: Vec<(ProcessId, Message)>,
    /// Abstract hash of each machine.
    machine_hash: Vec<u128>,
    /// Wrapping sum of the abstract hashes of the messages in flight to
    /// each process.
    flight_hash: Vec<u128>,
}

/// The result of one move, computed without copying the whole state.
struct Child {
    to: ProcessId,
    machine: Machine,
    /// Indices into the parent's in-flight list that are consumed or dropped.
    removed: Vec<usize>,
    added: Vec<(ProcessId, Message)>,
    machine_hash: Vec<u128>,
    flight_hash: Vec<u128>,
    fingerprint: u128,
}

struct Explorer {
    spec: TaskSpec,
    protocol: ProtocolKind,
    correct: Vec<bool>,
    /// Processes in the same class are interchangeable.
    classes: Vec<usize>,
    injectors: Vec<ProcessId>,
    bounds: ExplorerBounds,
    message_hash: Vec<u128>,
    memo: HashMap<u128, u64>,
    /// Combined steps per local state and source signature.
    step_cache: HashMap<u128, Rc<Vec<Step>>>,
    states: usize,
    decision_points: usize,
    stuck: usize,
    path: Vec<(ProcessId, Vec<Message>)>,
    witness: Option<String>,
    exhausted: bool,
}

/// Collects the bytes a `Hash` impl writes so they can be hashed at once.
struct ByteSink(Vec<u8>);

impl Hasher for ByteSink {
    fn write(&mut self, bytes: &[u8]) {
        self.0.extend_from_slice(bytes);
    }

    fn finish(&self) -> u64 {
        xxh3_64(&self.0)
    }
}

fn fingerprint128(hash: impl FnOnce(&mut dyn Hasher)) -> u128 {
    thread_local! {
        static SINK: RefCell<ByteSink> = const { RefCell::new(ByteSink(Vec::new())) };
    }
    SINK.with_borrow_mut(|sink| {
        sink.0.clear();
        hash(sink);
        xxh3_128(&sink.0)
    })
}

/// Messages one destination can receive next that its machine treats
/// alike: either in-flight copies of one `(kind, value)` from correct
/// senders, or a single message whose sender's identity matters.
struct Source {
    cell: usize,
    messages: Vec<Message>,
}

/// A combined step: the first `counts[i]` messages of every source, all
/// producing no output, then the next message of source `ending`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Step {
    counts: Vec<usize>,
    ending: usize,
}

/// Enumerates the combined steps at one destination whose final delivery
/// produces output and whose earlier deliveries each change that output.
/// The machine state after silent deliveries depends only on how many
/// messages of each `(kind, value)` were delivered, so outputs and step
/// verdicts are memoized per count vector and ending cell.
struct StepSearch<'a> {
    base: &'a Machine,
    sources: &'a [Source],
    counts: Vec<usize>,
    cells: Vec<u8>,
    key: Vec<u8>,
    outputs: HashMap<Vec<u8>, StepOutput>,
    verdicts: HashMap<Vec<u8>, bool>,
    found: Vec<Step>,
}

impl StepSearch<'_> {
    /// Visits every count vector once, adding deliveries in source order
    /// and stopping a source at its first delivery that is a duplicate or
    /// produces output.
    fn walk(&mut self, from: usize, current: &Machine) -> Result<(), ProtocolError> {
        self.leaf(current)?;
        for j in from..self.sources.len() {
            let Some(&message) = self.sources[j].messages.get(self.counts[j]) else {
                continue;
            };
            if current.is_duplicate(&message) {
                continue;
            }
            let mut next = current.clone();
            if !next.step(&Event::Deliver(message))?.is_empty() {
                continue;
            }
            let cell = self.sources[j].cell;
            self.counts[j] += 1;
            self.cells[cell] += 1;
            self.walk(j, &next)?;
            self.counts[j] -= 1;
            self.cells[cell] -= 1;
        }
        Ok(())
    }

    fn set_key(&mut self, drop_cell: Option<usize>, ending_cell: usize) {
        self.key.clear();
        self.key.extend_from_slice(&self.cells);
        if let Some(x) = drop_cell {
            self.key[x] -= 1;
        }
        self.key.extend_from_slice(&(ending_cell as u16).to_le_bytes());
    }

    /// Output of the ending after the current deliveries with one message
    /// of source `drop` left out. The ending is not a duplicate after all
    /// current deliveries, so it is not one after fewer either.
    fn output_without(&mut self, drop: usize, ending: Message, ending_cell: usize) -> Result<StepOutput, ProtocolError> {
        self.set_key(Some(self.sources[drop].cell), ending_cell);
        if let Some(out) = self.outputs.get(self.key.as_slice()) {
            return Ok(out.clone());
        }
        let mut m = self.base.clone();
        for (i, source) in self.sources.iter().enumerate() {
            let c = self.counts[i] - usize::from(i == drop);
            for message in &source.messages[..c] {
                m.step(&Event::Deliver(*message))?;
            }
        }
        debug_assert!(!m.is_duplicate(&ending));
        let out = m.step(&Event::Deliver(ending))?;
        self.outputs.insert(self.key.clone(), out.clone());
        Ok(out)
    }

    /// Whether delivering `ending` now produces output that every
    /// delivered cell contributes to.
    fn verdict(&mut self, current: &Machine, ending: Message, ending_cell: usize) -> Result<bool, ProtocolError> {
        self.set_key(None, ending_cell);
        if let Some(&ok) = self.verdicts.get(self.key.as_slice()) {
            return Ok(ok);
        }
        let key = self.key.clone();
        let out = match self.outputs.get(&key) {
            Some(out) => out.clone(),
            None => {
                let out = current.clone().step(&Event::Deliver(ending))?;
                self.outputs.insert(key.clone(), out.clone());
                out
            }
        };
        let mut ok = !out.is_empty();
        let mut seen = vec![false; self.cells.len()];
        for i in 0..self.sources.len() {
            let cell = self.sources[i].cell;
            if !ok || self.counts[i] == 0 || seen[cell] {
                continue;
            }
            seen[cell] = true;
            ok = self.output_without(i, ending, ending_cell)? != out;
        }
        self.verdicts.insert(key, ok);
        Ok(ok)
    }

    fn leaf(&mut self, current: &Machine) -> Result<(), ProtocolError> {
        for j in 0..self.sources.len() {
            let Some(&ending) = self.sources[j].messages.get(self.counts[j]) else {
                continue;
            };
            if current.is_duplicate(&ending) {
                continue;
            }
            if self.verdict(current, ending, self.sources[j].cell)? {
                self.found.push(Step {
                    counts: self.counts.clone(),
                    ending: j,
                });
            }
        }
        Ok(())
    }
}

impl Explorer {
    fn keep(&self, sender: ProcessId) -> bool {
        !self.correct[sender.0]
    }

    fn hash_machine(&self, machine: Option<&Machine>) -> u128 {
        let correct = &self.correct;
        let keep = |s: usize| !correct[s];
        fingerprint128(|h| match machine {
            Some(m) => m.hash_abstract(h, &keep),
            None => 0xffu8.hash(&mut &mut *h),
        })
    }

    fn hash_message(&self, m: &Message) -> u128 {
        self.message_hash[self.cell(m) * self.spec.n + m.sender.0]
    }

    /// Abstract hashes of every message, indexed by cell and sender.
    fn message_hashes(&self) -> Vec<u128> {
        let mut table = Vec::new();
        for &kind in self.protocol.kinds(self.spec.refinement) {
            for value in BranchValue::all(self.spec.value_count) {
                for sender in (0..self.spec.n).map(ProcessId) {
                    let named = self.keep(sender).then_some(sender);
                    table.push(fingerprint128(|h| (kind, value, named).hash(&mut &mut *h)));
                }
            }
        }
        table
    }

    fn fingerprint(&self, machine_hash: &[u128], flight_hash: &[u128]) -> u128 {
        let mut parts: Vec<(usize, u128, u128)> = (0..self.spec.n)
            .map(|d| (self.classes[d], machine_hash[d], flight_hash[d]))
            .collect();
        parts.sort_unstable();
        fingerprint128(|h| parts.hash(&mut &mut *h))
    }

    fn seal(&self, machines: Vec<Option<Machine>>, mut in_flight: Vec<(ProcessId, Message)>) -> State {
        in_flight.sort_unstable();
        let machine_hash = machines.iter().map(|m| self.hash_machine(m.as_ref())).collect();
        let mut flight_hash = vec![0u128; self.spec.n];
        for (d, m) in &in_flight {
            flight_hash[d.0] = flight_hash[d.0].wrapping_add(self.hash_message(m));
        }
        State {
            machines,
            in_flight,
            machine_hash,
            flight_hash,
        }
    }

    fn decided_mask(&self, state: &State) -> (u64, usize) {
        let mut mask = 0;
        let mut decided = 0;
        for (i, m) in state.machines.iter().enumerate() {
            if !self.correct[i] {
                continue;
            }
            if let Some(d) = m.as_ref().and_then(|m| m.decision()) {
                decided += 1;
                if let BranchValue::Val(v) = d.value {
                    mask |= 1 << v.index();
                }
            }
        }
        (mask, decided)
    }

    fn cell(&self, m: &Message) -> usize {
        let kinds = self.protocol.kinds(self.spec.refinement);
        let kind = kinds.iter().position(|&k| k == m.kind).expect("protocol message kind");
        kind * (self.spec.value_count + 1) + m.value.slot(self.spec.value_count)
    }

    /// Index range of the messages in flight to `to`.
    fn flight_range(state: &State, to: ProcessId) -> std::ops::Range<usize> {
        let lo = state.in_flight.partition_point(|(d, _)| *d < to);
        let hi = state.in_flight.partition_point(|(d, _)| *d <= to);
        lo..hi
    }

    /// What `to` can receive next: in-flight messages from correct senders
    /// grouped by `(kind, value)`, in-flight messages from faulty senders,
    /// and every message a malicious process could still inject.
    fn sources(&self, state: &State, to: ProcessId, machine: &Machine) -> Vec<Source> {
        let mut sources: Vec<Source> = Vec::new();
        let mut named = Vec::new();
        for (_, m) in &state.in_flight[Self::flight_range(state, to)] {
            if !self.correct[m.sender.0] {
                named.push(*m);
                continue;
            }
            let cell = self.cell(m);
            match sources.iter_mut().find(|s| s.cell == cell) {
                Some(s) => s.messages.push(*m),
                None => sources.push(Source {
                    cell,
                    messages: vec![*m],
                }),
            }
        }
        for &from in &self.injectors {
            for &kind in self.protocol.kinds(self.spec.refinement) {
                for value in BranchValue::all(self.spec.value_count) {
                    let message = Message::new(kind, value, from);
                    if !(kind == MsgKind::Input && value.is_bottom())
                        && !machine.is_duplicate(&message)
                        && machine.is_relevant(&message)
                    {
                        named.push(message);
                    }
                }
            }
        }
        sources.sort_by_key(|s| s.cell);
        sources.extend(named.into_iter().map(|m| Source {
            cell: self.cell(&m),
            messages: vec![m],
        }));
        sources
    }

    /// The combined steps at a machine, cached per abstract state and
    /// source signature.
    fn steps(
        &mut self,
        machine: &Machine,
        machine_hash: u128,
        sources: &[Source],
    ) -> Result<Rc<Vec<Step>>, ProtocolError> {
        let key = fingerprint128(|h| {
            let mut h = h;
            machine_hash.hash(&mut h);
            for s in sources {
                let first = s.messages[0].sender;
                (s.cell, self.keep(first).then_some(first), s.messages.len()).hash(&mut h);
            }
        });
        if let Some(steps) = self.step_cache.get(&key) {
            return Ok(Rc::clone(steps));
        }
        let cells = self.protocol.kinds(self.spec.refinement).len() * (self.spec.value_count + 1);
        let mut search = StepSearch {
            base: machine,
            sources,
            counts: vec![0; sources.len()],
            cells: vec![0; cells],
            key: Vec::new(),
            outputs: HashMap::new(),
            verdicts: HashMap::new(),
            found: Vec::new(),
        };
        search.walk(0, machine)?;
        let steps = Rc::new(search.found);
        self.step_cache.insert(key, Rc::clone(&steps));
        Ok(steps)
    }

    /// Delivery sequences worth exploring at one destination. A delivery
    /// that produces no output can always be postponed until just before
    /// the delivery whose output it changes, so only those combined steps
    /// are generated. Machines whose state depends on arrival order get
    /// every single delivery instead.
    fn moves_at(&mut self, state: &State, to: ProcessId) -> Result<Vec<Vec<Message>>, ProtocolError> {
        let Some(machine) = state.machines[to.0].as_ref() else {
            return Ok(Vec::new());
        };
        if machine.is_finished() {
            return Ok(Vec::new());
        }
        let sources = self.sources(state, to, machine);
        if !machine.silent_sets_commute() {
            return Ok(sources.iter().map(|s| vec![s.messages[0]]).collect());
        }
        let steps = self.steps(machine, state.machine_hash[to.0], &sources)?;
        Ok(steps
            .iter()
            .map(|step| {
                let mut sequence = Vec::new();
                for (source, &c) in sources.iter().zip(&step.counts) {
                    sequence.extend_from_slice(&source.messages[..c]);
                }
                sequence.push(sources[step.ending].messages[step.counts[step.ending]]);
                sequence
            })
            .collect())
    }

    /// Delivers `sequence` to `to` and works out the successor's hashes.
    /// Outgoing messages that their destination no longer cares about are
    /// never put in flight, and messages in flight to `to` that became
    /// irrelevant are dropped.
    fn probe(&self, state: &State, to: ProcessId, sequence: &[Message]) -> Result<Child, ProtocolError> {
        let mut machine = state.machines[to.0]
            .clone()
            .expect("moves only target live machines");
        let range = Self::flight_range(state, to);
        let mut removed = Vec::new();
        let mut outgoing = Vec::new();
        for message in sequence {
            let consumed = range
                .clone()
                .find(|&i| state.in_flight[i].1 == *message && !removed.contains(&i));
            removed.extend(consumed);
            outgoing.extend(machine.step(&Event::Deliver(*message))?.outgoing);
        }
        let mut flight_hash = state.flight_hash.clone();
        for i in range {
            let consumed = removed.contains(&i);
            let message = &state.in_flight[i].1;
            if consumed || !machine.is_relevant(message) {
                flight_hash[to.0] = flight_hash[to.0].wrapping_sub(self.hash_message(message));
                if !consumed {
                    removed.push(i);
                }
            }
        }
        let mut added = Vec::new();
        for o in outgoing {
            let dests: Vec<ProcessId> = match o.to {
                Destinations::All => (0..self.spec.n).map(ProcessId).collect(),
                Destinations::Only(d) => d,
            };
            for d in dests {
                let live = if d == to {
                    machine.is_relevant(&o.message)
                } else {
                    matches!(&state.machines[d.0], Some(m) if m.is_relevant(&o.message))
                };
                if live {
                    flight_hash[d.0] = flight_hash[d.0].wrapping_add(self.hash_message(&o.message));
                    added.push((d, o.message));
                }
            }
        }
        let mut machine_hash = state.machine_hash.clone();
        machine_hash[to.0] = self.hash_machine(Some(&machine));
        let fingerprint = self.fingerprint(&machine_hash, &flight_hash);
        Ok(Child {
            to,
            machine,
            removed,
            added,
            machine_hash,
            flight_hash,
            fingerprint,
        })
    }

    fn materialize(state: &State, child: Child) -> State {
        let mut machines = state.machines.clone();
        machines[child.to.0] = Some(child.machine);
        let mut in_flight: Vec<(ProcessId, Message)> = state
            .in_flight
            .iter()
            .enumerate()
            .filter(|(i, _)| !child.removed.contains(i))
            .map(|(_, e)| *e)
            .collect();
        in_flight.extend(child.added);
        in_flight.sort_unstable();
        State {
            machines,
            in_flight,
            machine_hash: child.machine_hash,
            flight_hash: child.flight_hash,
        }
    }

    fn path_label(&self) -> String {
        let steps: Vec<String> = self
            .path
            .iter()
            .map(|(to, sequence)| {
                let messages: Vec<String> = sequence.iter().map(|m| m.to_string()).collect();
                format!("{}<-[{}]", to, messages.join(", "))
            })
            .collect();
        steps.join(" ")
    }

    /// Returns the mask of branch values decided in some extension of
    /// `state`, whose fingerprint is `fp`.
    fn dfs(&mut self, state: &State, fp: u128) -> Result<u64, ProtocolError> {
        if let Some(&mask) = self.memo.get(&fp) {
            return Ok(mask);
        }
        if self.states >= self.bounds.max_states {
            self.exhausted = true;
            return Ok(0);
        }
        self.states += 1;
        let (mut mask, decided) = self.decided_mask(state);
        let correct_count = self.correct.iter().filter(|&&c| c).count();
        if decided == correct_count {
            self.memo.insert(fp, mask);
            return Ok(mask);
        }
        let mut moves = Vec::new();
        for to in (0..self.spec.n).map(ProcessId) {
            for sequence in self.moves_at(state, to)? {
                moves.push((to, sequence));
            }
        }
        let progress = moves.iter().any(|(to, sequence)| {
            self.correct[to.0] && sequence.iter().all(|m| self.correct[m.sender.0])
        });
        if !progress {
            self.stuck += 1;
            if self.witness.is_none() {
                self.witness = Some(format!("stuck after {}", self.path_label()));
            }
        }
        for (to, sequence) in moves {
            let child = self.probe(state, to, &sequence)?;
            let first_decision = decided == 0
                && self.correct[to.0]
                && child.machine.decision().is_some();
            self.path.push((to, sequence));
            let child_mask = match self.memo.get(&child.fingerprint) {
                Some(&m) => m,
                None => {
                    let fp = child.fingerprint;
                    let next = Self::materialize(state, child);
                    self.dfs(&next, fp)?
                }
            };
            if first_decision {
                self.decision_points += 1;
                if child_mask.count_ones() > 1 && self.witness.is_none() {
                    self.witness = Some(format!(
                        "branches {:#b} reachable after {}",
                        child_mask,
                        self.path_label()
                    ));
                }
            }
            self.path.pop();
            mask |= child_mask;
            if self.witness.is_some() || self.exhausted {
                return Ok(mask);
            }
        }
        self.memo.insert(fp, mask);
        Ok(mask)
    }
}

/// Explores every execution of `protocol` from `inputs` with the given
/// faulty set. Under malicious faults the faulty processes' inputs are
/// ignored; under crash faults they run the protocol and may stop anywhere.
pub fn binding_explorer(
    spec: &TaskSpec,
    protocol: ProtocolKind,
    inputs: &[Value],
    faulty: &BTreeSet<ProcessId>,
    options: BuildOptions,
    bounds: ExplorerBounds,
) -> Result<ExplorerReport, ExploreError> {
    let mut reports = binding_explorer_batch(spec, protocol, &[inputs.to_vec()], faulty, options, bounds)?;
    Ok(reports.remove(0))
}

/// Runs [`binding_explorer`] on several input assignments with one shared
/// memo. The state budget applies to each assignment separately, and a
/// state explored for an earlier assignment is not counted again, so an
/// assignment symmetric to an earlier one reports zero states.
pub fn binding_explorer_batch(
    spec: &TaskSpec,
    protocol: ProtocolKind,
    assignments: &[Vec<Value>],
    faulty: &BTreeSet<ProcessId>,
    options: BuildOptions,
    bounds: ExplorerBounds,
) -> Result<Vec<ExplorerReport>, ExploreError> {
    spec.validate()?;
    protocol.check(spec, options.allow_underresilient)?;
    if faulty.len() > spec.f {
        return Err(ExploreError::TooManyFaults {
            got: faulty.len(),
            budget: spec.f,
        });
    }
    if spec.value_count > 64 {
        return Err(ExploreError::TooManyValues);
    }
    let malicious = spec.failure_model == FailureModel::Malicious;
    let correct: Vec<bool> = (0..spec.n).map(|i| !faulty.contains(&ProcessId(i))).collect();
    let mut explorer = Explorer {
        spec: *spec,
        protocol,
        classes: (0..spec.n).map(|i| if correct[i] { 0 } else { 1 + i }).collect(),
        correct,
        injectors: if malicious { faulty.iter().copied().collect() } else { Vec::new() },
        bounds,
        message_hash: Vec::new(),
        memo: HashMap::new(),
        step_cache: HashMap::new(),
        states: 0,
        decision_points: 0,
        stuck: 0,
        path: Vec::new(),
        witness: None,
        exhausted: false,
    };
    explorer.message_hash = explorer.message_hashes();
    let mut reports = Vec::with_capacity(assignments.len());
    for inputs in assignments {
        if inputs.len() != spec.n {
            return Err(ExploreError::InputCount {
                expected: spec.n,
                got: inputs.len(),
            });
        }
        let mut machines = Vec::with_capacity(spec.n);
        for (i, &input) in inputs.iter().enumerate() {
            machines.push(if malicious && !explorer.correct[i] {
                None
            } else {
                Some(protocol.build(spec, ProcessId(i), input, options)?)
            });
        }
        let mut in_flight = Vec::new();
        for (i, machine) in machines.iter_mut().enumerate() {
            let Some(m) = machine.as_mut() else { continue };
            if !explorer.correct[i] && malicious {
                continue;
            }
            for o in m.step(&Event::Wakeup)?.outgoing {
                let dests: Vec<ProcessId> = match o.to {
                    Destinations::All => (0..spec.n).map(ProcessId).collect(),
                    Destinations::Only(d) => d,
                };
                for d in dests.into_iter().filter(|d| !malicious || explorer.correct[d.0]) {
                    in_flight.push((d, o.message));
                }
            }
        }
        let root = explorer.seal(machines, in_flight);
        let fp = explorer.fingerprint(&root.machine_hash, &root.flight_hash);
        explorer.states = 0;
        explorer.decision_points = 0;
        explorer.stuck = 0;
        explorer.witness = None;
        explorer.exhausted = false;
        let mask = explorer.dfs(&root, fp)?;
        let outcome = if explorer.witness.is_some() {
            Outcome::Fail
        } else if explorer.exhausted {
            Outcome::Inconclusive
        } else {
            Outcome::Pass
        };
        reports.push(ExplorerReport {
            outcome,
            states: explorer.states,
            decision_points: explorer.decision_points,
            reachable_branches: (0..spec.value_count)
                .filter(|&v| mask & (1 << v) != 0)
                .map(|v| Value(v as u16))
                .collect(),
            stuck_states: explorer.stuck,
            witness: explorer.witness.take(),
        });
    }
    Ok(reports)
}
