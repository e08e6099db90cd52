//! Deterministic discrete-event simulation of an asynchronous network.
//!
//! The adversary picks every message delay (exact rationals), which
//! processes are faulty, where crash-faulty processes stop and what
//! malicious processes inject. Deliveries with equal times are ordered by
//! `(time, destination, sender, kind, value)`, so a run is a pure function
//! of its configuration and the adversary's seed.
//!
//! Every correct process wakes at time 0. The run drains the event queue,
//! so every message sent to a correct process is delivered.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::io::{self, Write};
use std::ops::{Add, Div, Sub};
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::adversaries::{AdversaryError, AdversaryPolicy, CrashCut, Injection};
use crate::protocols::{
    BuildOptions, Destinations, Event, Machine, Message, MsgKind, ProcessId, ProcessMachine,
    ProtocolError, ProtocolKind, StepOutput,
};
use crate::spider::{BranchValue, FailureModel, SpiderError, TaskSpec, Value, Vertex};

/// Exact simulated time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(Rational64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(Rational64::new_raw(0, 1));
    pub const ONE: SimTime = SimTime(Rational64::new_raw(1, 1));

    /// `numer / denom`; panics on a zero denominator.
    pub fn new(numer: i64, denom: i64) -> SimTime {
        SimTime(Rational64::new(numer, denom))
    }

    pub fn from_int(t: i64) -> SimTime {
        SimTime(Rational64::from_integer(t))
    }

    pub fn ratio(self) -> Rational64 {
        self.0
    }

    pub fn numer(self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }

    pub fn is_negative(self) -> bool {
        self.0.is_negative()
    }
}

impl From<Rational64> for SimTime {
    fn from(r: Rational64) -> Self {
        SimTime(r)
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl Div for SimTime {
    type Output = SimTime;
    fn div(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 / rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for SimTime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |x: &str| {
            x.trim()
                .parse::<i64>()
                .map_err(|e| format!("bad time `{s}`: {e}"))
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let d = parse(d)?;
                if d == 0 {
                    return Err(format!("bad time `{s}`: zero denominator"));
                }
                Ok(SimTime::new(parse(n)?, d))
            }
            None => Ok(SimTime::from_int(parse(s)?)),
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("expected {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("adversary names {got} faulty processes, budget is {budget}")]
    TooManyFaults { got: usize, budget: usize },
    #[error("faulty process {0} is out of range")]
    BadFaulty(ProcessId),
    #[error("adversary chose negative delay {delay} for {message}")]
    NegativeDelay { delay: SimTime, message: Message },
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("invalid injection: {0}")]
    BadInjection(String),
    #[error("liveness violation: event budget of {budget} deliveries exhausted")]
    Liveness { budget: usize },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Spec(#[from] SpiderError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("correct process {0} has not decided")]
    Undecided(ProcessId),
    #[error("no correct-to-correct message was delivered before the last decision")]
    NoDelay,
    #[error("trace has no correct process")]
    NoCorrectProcess,
}

/// A message in flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingDelivery {
    pub message: Message,
    pub destination: ProcessId,
    pub send_time: SimTime,
    pub deliver_time: SimTime,
}

impl PendingDelivery {
    fn key(&self) -> (SimTime, ProcessId, ProcessId, MsgKind, BranchValue) {
        (
            self.deliver_time,
            self.destination,
            self.message.sender,
            self.message.kind,
            self.message.value,
        )
    }
}

#[derive(Debug, PartialEq, Eq)]
struct Queued(PendingDelivery, u64);

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.0.key(), self.1).cmp(&(other.0.key(), other.1))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Wakeup,
    Deliver { message: Message, sent_at: SimTime },
}

/// One point-to-point send produced by a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentMessage {
    pub to: ProcessId,
    pub kind: MsgKind,
    pub value: BranchValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub time: SimTime,
    pub process: ProcessId,
    pub event: TraceEvent,
    pub sends: Vec<SentMessage>,
    pub decision: Option<Vertex>,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} proc={} ev=", self.time, self.process)?;
        match &self.event {
            TraceEvent::Wakeup => f.write_str("WAKEUP")?,
            TraceEvent::Deliver { message, .. } => write!(
                f,
                "DELIVER {} {} {}",
                message.kind, message.value, message.sender
            )?,
        }
        for s in &self.sends {
            write!(f, " send {} {} {}", s.to, s.kind, s.value)?;
        }
        if let Some(d) = self.decision {
            write!(f, " decide {} {}", d.value, d.grade)?;
        }
        Ok(())
    }
}

fn parse_value(s: &str) -> Result<BranchValue, String> {
    if s == "bot" {
        Ok(BranchValue::Bottom)
    } else {
        s.parse::<u16>()
            .map(|v| BranchValue::Val(Value(v)))
            .map_err(|_| format!("bad value `{s}`"))
    }
}

fn parse_pid(s: &str) -> Result<ProcessId, String> {
    s.parse::<usize>()
        .map(ProcessId)
        .map_err(|_| format!("bad process id `{s}`"))
}

impl FromStr for TraceRecord {
    type Err = String;

    /// Parses the line format written by `Display`. Send times of delivered
    /// messages are not part of the line and come back as the record time.
    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut tok = line.split_whitespace();
        let mut field = |prefix: &str| -> Result<String, String> {
            tok.next()
                .and_then(|t| t.strip_prefix(prefix))
                .map(str::to_owned)
                .ok_or_else(|| format!("expected `{prefix}…` in `{line}`"))
        };
        let time: SimTime = field("t=")?.parse()?;
        let process = parse_pid(&field("proc=")?)?;
        let ev = field("ev=")?;
        let rest: Vec<&str> = line.split_whitespace().skip(3).collect();
        let mut i = 0;
        let event = match ev.as_str() {
            "WAKEUP" => TraceEvent::Wakeup,
            "DELIVER" => {
                let [kind, value, sender] = rest.get(..3).and_then(|s| <[&str; 3]>::try_from(s).ok()).ok_or("truncated DELIVER")?;
                i = 3;
                TraceEvent::Deliver {
                    message: Message::new(kind.parse()?, parse_value(value)?, parse_pid(sender)?),
                    sent_at: time,
                }
            }
            other => return Err(format!("unknown event `{other}`")),
        };
        let mut sends = Vec::new();
        let mut decision = None;
        while i < rest.len() {
            match rest[i] {
                "send" if i + 3 < rest.len() => {
                    sends.push(SentMessage {
                        to: parse_pid(rest[i + 1])?,
                        kind: rest[i + 2].parse()?,
                        value: parse_value(rest[i + 3])?,
                    });
                    i += 4;
                }
                "decide" if i + 2 < rest.len() => {
                    let grade = rest[i + 2]
                        .parse::<u8>()
                        .map_err(|_| format!("bad grade `{}`", rest[i + 2]))?;
                    decision = Some(Vertex {
                        value: parse_value(rest[i + 1])?,
                        grade,
                    });
                    i += 3;
                }
                other => return Err(format!("unexpected token `{other}`")),
            }
        }
        Ok(TraceRecord {
            time,
            process,
            event,
            sends,
            decision,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SenderClass {
    Correct,
    Faulty,
}

/// Exact point-to-point message counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageTotals {
    pub by_kind: BTreeMap<(SenderClass, MsgKind), u64>,
}

impl MessageTotals {
    pub fn get(&self, class: SenderClass, kind: MsgKind) -> u64 {
        self.by_kind.get(&(class, kind)).copied().unwrap_or(0)
    }

    pub fn total(&self, class: SenderClass) -> u64 {
        self.by_kind
            .iter()
            .filter(|((c, _), _)| *c == class)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn correct_total(&self) -> u64 {
        self.total(SenderClass::Correct)
    }

    fn bump(&mut self, class: SenderClass, kind: MsgKind) {
        *self.by_kind.entry((class, kind)).or_default() += 1;
    }
}

/// A complete, replayable record of one run.
#[derive(Debug, Clone)]
pub struct ExecutionTrace {
    pub spec: TaskSpec,
    pub protocol: ProtocolKind,
    pub inputs: Vec<Value>,
    pub faulty: BTreeSet<ProcessId>,
    pub records: Vec<TraceRecord>,
    /// First decision of each process and when it happened.
    pub decisions: Vec<Option<(Vertex, SimTime)>>,
    pub totals: MessageTotals,
    /// Largest delay of a correct-to-correct message sent up to the last
    /// correct decision.
    pub max_correct_delay: Option<SimTime>,
}

impl ExecutionTrace {
    pub fn is_correct(&self, p: ProcessId) -> bool {
        !self.faulty.contains(&p)
    }

    pub fn correct_processes(&self) -> impl Iterator<Item = ProcessId> + '_ {
        (0..self.spec.n).map(ProcessId).filter(|&p| self.is_correct(p))
    }

    /// Decisions of correct processes; undecided ones are skipped.
    pub fn correct_decisions(&self) -> Vec<(ProcessId, Vertex)> {
        self.correct_processes()
            .filter_map(|p| self.decisions[p.0].map(|(d, _)| (p, d)))
            .collect()
    }

    /// Inputs the validity condition quantifies over: all processes under
    /// crash faults, correct ones under malicious faults.
    pub fn validity_inputs(&self) -> BTreeSet<Value> {
        (0..self.spec.n)
            .map(ProcessId)
            .filter(|&p| self.spec.failure_model == FailureModel::Crash || self.is_correct(p))
            .map(|p| self.inputs[p.0])
            .collect()
    }

    fn last_correct_decision(&self) -> Result<SimTime, TraceError> {
        let mut last = None;
        for p in self.correct_processes() {
            let (_, t) = self.decisions[p.0].ok_or(TraceError::Undecided(p))?;
            last = last.max(Some(t));
        }
        last.ok_or(TraceError::NoCorrectProcess)
    }

    /// Time of the last correct decision, measured from the last correct
    /// wakeup (time 0) in units of the largest correct-to-correct delay.
    pub fn scaled_decision_time(&self) -> Result<SimTime, TraceError> {
        let last = self.last_correct_decision()?;
        let latest_wakeup = self
            .records
            .iter()
            .filter(|r| r.event == TraceEvent::Wakeup && self.is_correct(r.process))
            .map(|r| r.time)
            .max()
            .unwrap_or(SimTime::ZERO);
        match self.max_correct_delay {
            Some(d) if !d.0.is_zero() => Ok((last - latest_wakeup) / d),
            _ => Err(TraceError::NoDelay),
        }
    }

    pub fn message_totals(&self) -> &MessageTotals {
        &self.totals
    }

    pub fn write_lines(&self, mut w: impl Write) -> io::Result<()> {
        for r in &self.records {
            writeln!(w, "{r}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_lines(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("trace lines are ASCII")
    }

    /// Checks the trace against the execution model: times never go back,
    /// each correct process wakes exactly once at time 0 before anything
    /// else happens to it, deliveries never precede their send, at most one
    /// decision per process, correct senders respect the dedup ledger, and
    /// every correct-to-correct message is delivered exactly once.
    pub fn check_conformance(&self) -> Result<(), String> {
        let n = self.spec.n;
        let mut woke = vec![0usize; n];
        let mut decided = vec![false; n];
        let mut last = SimTime::ZERO;
        let mut in_flight: BTreeMap<(ProcessId, ProcessId, MsgKind, BranchValue), i64> =
            BTreeMap::new();
        let mut dedup: BTreeSet<(ProcessId, ProcessId, MsgKind, Option<BranchValue>)> =
            BTreeSet::new();
        for (i, r) in self.records.iter().enumerate() {
            if r.time < last {
                return Err(format!("record {i}: time goes backwards"));
            }
            last = r.time;
            let p = r.process;
            match &r.event {
                TraceEvent::Wakeup => {
                    woke[p.0] += 1;
                    if self.is_correct(p) && r.time != SimTime::ZERO {
                        return Err(format!("record {i}: correct wakeup after time 0"));
                    }
                }
                TraceEvent::Deliver { message, sent_at } => {
                    if woke[p.0] == 0 {
                        return Err(format!("record {i}: delivery before wakeup"));
                    }
                    if *sent_at > r.time {
                        return Err(format!("record {i}: delivered before it was sent"));
                    }
                    if self.is_correct(message.sender) && self.is_correct(p) {
                        *in_flight
                            .entry((message.sender, p, message.kind, message.value))
                            .or_default() -= 1;
                    }
                }
            }
            if self.is_correct(p) && woke[p.0] != 1 {
                return Err(format!("record {i}: process {p} woke {} times", woke[p.0]));
            }
            if r.decision.is_some() {
                if decided[p.0] {
                    return Err(format!("record {i}: process {p} decided twice"));
                }
                decided[p.0] = true;
            }
            for s in &r.sends {
                let key_value = ProtocolKind::dedup_per_value(s.kind).then_some(s.value);
                if self.is_correct(p) && !dedup.insert((p, s.to, s.kind, key_value)) {
                    return Err(format!("record {i}: {p} repeats {} to {}", s.kind, s.to));
                }
                if self.is_correct(p) && self.is_correct(s.to) {
                    *in_flight.entry((p, s.to, s.kind, s.value)).or_default() += 1;
                }
            }
        }
        if let Some((k, c)) = in_flight.iter().find(|(_, &c)| c != 0) {
            return Err(format!(
                "message {} {} from {} to {} delivered {} times too few",
                k.2, k.3, k.0, k.1, c
            ));
        }
        Ok(())
    }
}

/// Default cap on deliveries per process before a run is declared stuck.
pub fn default_event_budget(spec: &TaskSpec) -> usize {
    10 * spec.n * (spec.value_count + 6)
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub spec: TaskSpec,
    pub protocol: ProtocolKind,
    pub inputs: Vec<Value>,
    pub options: BuildOptions,
    /// Deliveries per process; defaults to [`default_event_budget`].
    pub event_budget: Option<usize>,
}

impl SimConfig {
    pub fn new(spec: TaskSpec, protocol: ProtocolKind, inputs: Vec<Value>) -> Self {
        SimConfig {
            spec,
            protocol,
            inputs,
            options: BuildOptions::default(),
            event_budget: None,
        }
    }
}

struct Sim<'a> {
    config: &'a SimConfig,
    adversary: &'a mut dyn AdversaryPolicy,
    faulty: BTreeSet<ProcessId>,
    machines: Vec<Option<Machine>>,
    crash_cuts: Vec<Option<CrashCut>>,
    broadcasts: Vec<usize>,
    crashed: Vec<bool>,
    queue: BinaryHeap<Reverse<Queued>>,
    seq: u64,
    now: SimTime,
    records: Vec<TraceRecord>,
    decisions: Vec<Option<(Vertex, SimTime)>>,
    totals: MessageTotals,
}

impl Sim<'_> {
    fn class(&self, p: ProcessId) -> SenderClass {
        if self.faulty.contains(&p) {
            SenderClass::Faulty
        } else {
            SenderClass::Correct
        }
    }

    fn push(&mut self, pending: PendingDelivery) {
        self.seq += 1;
        self.queue.push(Reverse(Queued(pending, self.seq)));
    }

    fn inject(&mut self, injections: Vec<Injection>) -> Result<(), SimError> {
        for inj in injections {
            let malicious = self.config.spec.failure_model == FailureModel::Malicious;
            if !malicious || !self.faulty.contains(&inj.from) {
                return Err(SimError::BadInjection(format!(
                    "{} is not a malicious process",
                    inj.from
                )));
            }
            if inj.to.0 >= self.config.spec.n {
                return Err(SimError::BadInjection(format!("no process {}", inj.to)));
            }
            if inj.at < self.now {
                return Err(SimError::BadInjection(format!(
                    "delivery at {} is in the past (now {})",
                    inj.at, self.now
                )));
            }
            let message = Message::new(inj.kind, inj.value, inj.from);
            self.totals.bump(SenderClass::Faulty, inj.kind);
            self.push(PendingDelivery {
                message,
                destination: inj.to,
                send_time: inj.at,
                deliver_time: inj.at,
            });
        }
        Ok(())
    }

    /// Expands a step's broadcasts into point-to-point sends, applying any
    /// crash cut, and schedules them.
    fn dispatch(&mut self, p: ProcessId, out: &StepOutput) -> Result<Vec<SentMessage>, SimError> {
        let n = self.config.spec.n;
        let mut sent = Vec::new();
        for o in &out.outgoing {
            if self.crashed[p.0] {
                break;
            }
            let mut dests: Vec<ProcessId> = match &o.to {
                Destinations::All => (0..n).map(ProcessId).collect(),
                Destinations::Only(d) => d.clone(),
            };
            if let Some(cut) = &self.crash_cuts[p.0] {
                if self.broadcasts[p.0] == cut.full_broadcasts {
                    dests.retain(|d| cut.partial.contains(d));
                    self.crashed[p.0] = true;
                }
            }
            self.broadcasts[p.0] += 1;
            for to in dests {
                let delay = self.adversary.delay(p, to, &o.message, self.now);
                if delay.is_negative() {
                    return Err(SimError::NegativeDelay {
                        delay,
                        message: o.message,
                    });
                }
                self.totals.bump(self.class(p), o.message.kind);
                sent.push(SentMessage {
                    to,
                    kind: o.message.kind,
                    value: o.message.value,
                });
                self.push(PendingDelivery {
                    message: o.message,
                    destination: to,
                    send_time: self.now,
                    deliver_time: self.now + delay,
                });
            }
        }
        Ok(sent)
    }

    fn step(&mut self, p: ProcessId, event: TraceEvent) -> Result<(), SimError> {
        let ev = match &event {
            TraceEvent::Wakeup => Event::Wakeup,
            TraceEvent::Deliver { message, .. } => Event::Deliver(*message),
        };
        let Some(machine) = self.machines[p.0].as_mut() else {
            return Ok(());
        };
        let out = machine.step(&ev)?;
        let sends = self.dispatch(p, &out)?;
        if let Some(d) = out.decision {
            if self.decisions[p.0].is_none() {
                self.decisions[p.0] = Some((d, self.now));
            }
        }
        self.records.push(TraceRecord {
            time: self.now,
            process: p,
            event,
            sends,
            decision: out.decision,
        });
        let injections = self.adversary.on_step(self.now, p, &out);
        self.inject(injections)
    }

    fn run(mut self) -> Result<ExecutionTrace, SimError> {
        let spec = self.config.spec;
        let injections = self.adversary.initial_injections(&spec, self.config.protocol);
        self.inject(injections)?;
        for p in (0..spec.n).map(ProcessId) {
            self.step(p, TraceEvent::Wakeup)?;
        }
        let budget = spec.n * self.config.event_budget.unwrap_or_else(|| default_event_budget(&spec));
        let mut deliveries = 0usize;
        while let Some(Reverse(Queued(pending, _))) = self.queue.pop() {
            self.now = pending.deliver_time;
            let to = pending.destination;
            if self.machines[to.0].is_none() || self.crashed[to.0] {
                continue;
            }
            deliveries += 1;
            if deliveries > budget {
                return Err(SimError::Liveness { budget });
            }
            self.step(
                to,
                TraceEvent::Deliver {
                    message: pending.message,
                    sent_at: pending.send_time,
                },
            )?;
        }
        let trace = ExecutionTrace {
            spec,
            protocol: self.config.protocol,
            inputs: self.config.inputs.clone(),
            faulty: self.faulty,
            max_correct_delay: None,
            records: self.records,
            decisions: self.decisions,
            totals: self.totals,
        };
        Ok(with_max_delay(trace))
    }
}

fn with_max_delay(mut trace: ExecutionTrace) -> ExecutionTrace {
    let last_decision = trace
        .correct_processes()
        .filter_map(|p| trace.decisions[p.0].map(|(_, t)| t))
        .max();
    let mut max = None;
    if let Some(end) = last_decision {
        // The run drains its queue, so every correct-to-correct message sent
        // by `end` shows up as a delivery, even one that lands after `end`.
        for r in &trace.records {
            if let TraceEvent::Deliver { message, sent_at } = &r.event {
                if *sent_at <= end && trace.is_correct(message.sender) && trace.is_correct(r.process) {
                    max = max.max(Some(r.time - *sent_at));
                }
            }
        }
    }
    trace.max_correct_delay = max;
    trace
}

/// Runs one execution to quiescence.
pub fn run(
    config: &SimConfig,
    adversary: &mut dyn AdversaryPolicy,
) -> Result<ExecutionTrace, SimError> {
    let spec = config.spec;
    spec.validate()?;
    config.protocol.check(&spec, config.options.allow_underresilient)?;
    if config.inputs.len() != spec.n {
        return Err(SimError::InputCount {
            expected: spec.n,
            got: config.inputs.len(),
        });
    }
    adversary.check(&spec, config.protocol)?;
    let faulty = adversary.faulty();
    if faulty.len() > spec.f {
        return Err(SimError::TooManyFaults {
            got: faulty.len(),
            budget: spec.f,
        });
    }
    if let Some(&p) = faulty.iter().find(|p| p.0 >= spec.n) {
        return Err(SimError::BadFaulty(p));
    }
    let mut machines = Vec::with_capacity(spec.n);
    let mut crash_cuts = Vec::with_capacity(spec.n);
    for (i, &input) in config.inputs.iter().enumerate() {
        let p = ProcessId(i);
        let cut = if faulty.contains(&p) {
            adversary.crash_cut(p)
        } else {
            None
        };
        let injector_only = faulty.contains(&p)
            && cut.is_none()
            && spec.failure_model == FailureModel::Malicious;
        machines.push(if injector_only {
            None
        } else {
            Some(config.protocol.build(&spec, p, input, config.options)?)
        });
        crash_cuts.push(cut);
    }
    let sim = Sim {
        config,
        adversary,
        faulty,
        machines,
        crash_cuts,
        broadcasts: vec![0; spec.n],
        crashed: vec![false; spec.n],
        queue: BinaryHeap::new(),
        seq: 0,
        now: SimTime::ZERO,
        records: Vec::new(),
        decisions: vec![None; spec.n],
        totals: MessageTotals::default(),
    };
    sim.run()
}
