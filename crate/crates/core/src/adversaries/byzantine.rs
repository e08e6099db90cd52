use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_delays, AdversaryError, AdversaryPolicy, Injection};
use crate::protocols::{Message, MsgKind, ProcessId, ProtocolKind};
use crate::simnet::SimTime;
use crate::spider::{BranchValue, FailureModel, TaskSpec, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ByzStrategy {
    /// Faulty processes send nothing.
    Silent,
    /// Each faulty process tells the lower half of the correct processes
    /// the first value and the upper half the second, in every message kind.
    Split(Value, Value),
    /// Every message kind, and every value where the dedup ledger counts
    /// values separately, to everyone.
    Flood,
    /// Each message kind with probability 1/2, carrying a random value; at
    /// most one ECHO per recipient.
    Random,
}

impl fmt::Display for ByzStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ByzStrategy::Silent => f.write_str("silent"),
            ByzStrategy::Split(v, u) => write!(f, "split:{v}:{u}"),
            ByzStrategy::Flood => f.write_str("flood"),
            ByzStrategy::Random => f.write_str("random"),
        }
    }
}

impl FromStr for ByzStrategy {
    type Err = String;

    /// `silent`, `flood`, `random` or `split:<v>:<u>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let value = |x: &str| {
            x.parse::<u16>()
                .map(Value)
                .map_err(|_| format!("bad split value `{x}`"))
        };
        match parts.as_slice() {
            ["silent"] => Ok(ByzStrategy::Silent),
            ["flood"] => Ok(ByzStrategy::Flood),
            ["random"] => Ok(ByzStrategy::Random),
            ["split", v, u] => Ok(ByzStrategy::Split(value(v)?, value(u)?)),
            _ => Err(format!("unknown Byzantine strategy `{s}`")),
        }
    }
}

/// Malicious processes that equivocate according to a [`ByzStrategy`],
/// with random correct-message delays and random injection times.
#[derive(Debug, Clone)]
pub struct ByzEquivocator {
    rng: ChaCha8Rng,
    strategy: ByzStrategy,
    delays: Vec<SimTime>,
    faulty: BTreeSet<ProcessId>,
}

impl ByzEquivocator {
    /// The faulty set is a seeded random choice of `f` processes.
    pub fn new(
        spec: &TaskSpec,
        seed: u64,
        strategy: ByzStrategy,
        delays: Vec<SimTime>,
    ) -> Result<ByzEquivocator, AdversaryError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids: Vec<ProcessId> = (0..spec.n).map(ProcessId).collect();
        ids.shuffle(&mut rng);
        Self::with_faulty(spec, seed, strategy, delays, ids.into_iter().take(spec.f))
    }

    pub fn with_faulty(
        spec: &TaskSpec,
        seed: u64,
        strategy: ByzStrategy,
        delays: Vec<SimTime>,
        faulty: impl IntoIterator<Item = ProcessId>,
    ) -> Result<ByzEquivocator, AdversaryError> {
        check_delays(&delays)?;
        if let ByzStrategy::Split(v, u) = strategy {
            for x in [v, u] {
                if x.index() >= spec.value_count {
                    return Err(AdversaryError::Unsupported(format!(
                        "split value {x} outside the value set"
                    )));
                }
            }
        }
        Ok(ByzEquivocator {
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15),
            strategy,
            delays,
            faulty: faulty.into_iter().collect(),
        })
    }

    fn draw_delay(&mut self) -> SimTime {
        *self.delays.choose(&mut self.rng).expect("menu checked non-empty")
    }

    /// A random time within the protocol's active window.
    fn draw_time(&mut self, rounds: usize) -> SimTime {
        let hops = self.rng.gen_range(0..=rounds);
        (0..hops).fold(SimTime::ZERO, |t, _| t + self.draw_delay())
    }

    fn values_for(&mut self, kind: MsgKind, value_count: usize) -> Vec<BranchValue> {
        let menu: Vec<BranchValue> = BranchValue::all(value_count)
            .filter(|v| kind != MsgKind::Input || !v.is_bottom())
            .collect();
        let per_value = ProtocolKind::dedup_per_value(kind);
        match self.strategy {
            ByzStrategy::Silent | ByzStrategy::Split(..) => Vec::new(),
            ByzStrategy::Flood if per_value => menu,
            ByzStrategy::Flood => vec![*menu.choose(&mut self.rng).expect("non-empty")],
            ByzStrategy::Random => {
                if self.rng.gen_bool(0.5) {
                    vec![*menu.choose(&mut self.rng).expect("non-empty")]
                } else {
                    Vec::new()
                }
            }
        }
    }
}

impl AdversaryPolicy for ByzEquivocator {
    fn check(&self, spec: &TaskSpec, _protocol: ProtocolKind) -> Result<(), AdversaryError> {
        if spec.failure_model != FailureModel::Malicious && self.strategy != ByzStrategy::Silent {
            return Err(AdversaryError::Unsupported(
                "equivocation needs the malicious failure model".into(),
            ));
        }
        Ok(())
    }

    fn faulty(&self) -> BTreeSet<ProcessId> {
        self.faulty.clone()
    }

    fn delay(&mut self, _: ProcessId, _: ProcessId, _: &Message, _: SimTime) -> SimTime {
        self.draw_delay()
    }

    fn initial_injections(&mut self, spec: &TaskSpec, protocol: ProtocolKind) -> Vec<Injection> {
        let rounds = match protocol {
            ProtocolKind::EchoCc => 6,
            _ => usize::from(spec.refinement),
        };
        let correct: Vec<ProcessId> = (0..spec.n)
            .map(ProcessId)
            .filter(|p| !self.faulty.contains(p))
            .collect();
        let mut out = Vec::new();
        for from in self.faulty.clone() {
            for &kind in protocol.kinds(spec.refinement) {
                for (i, &to) in correct.iter().enumerate() {
                    let values = match self.strategy {
                        ByzStrategy::Split(v, u) => {
                            vec![if 2 * i < correct.len() { v } else { u }.into()]
                        }
                        _ => self.values_for(kind, spec.value_count),
                    };
                    for value in values {
                        let at = self.draw_time(rounds);
                        out.push(Injection {
                            from,
                            to,
                            kind,
                            value,
                            at,
                        });
                    }
                }
            }
        }
        out
    }
}
