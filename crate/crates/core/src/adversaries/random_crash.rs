use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_delays, AdversaryError, AdversaryPolicy, CrashCut};
use crate::protocols::{Message, ProcessId, ProtocolKind};
use crate::simnet::SimTime;
use crate::spider::TaskSpec;

/// Crashes a random subset of a random `f`-set of candidates at random
/// points, possibly mid-broadcast, and draws every delay independently
/// from a finite menu.
#[derive(Debug, Clone)]
pub struct RandomCrash {
    rng: ChaCha8Rng,
    delays: Vec<SimTime>,
    candidates: BTreeSet<ProcessId>,
    crashing: BTreeSet<ProcessId>,
    n: usize,
    broadcast_budget: usize,
}

impl RandomCrash {
    pub fn new(
        spec: &TaskSpec,
        protocol: ProtocolKind,
        seed: u64,
        crash_prob: f64,
        delays: Vec<SimTime>,
    ) -> Result<RandomCrash, AdversaryError> {
        check_delays(&delays)?;
        if !(0.0..=1.0).contains(&crash_prob) {
            return Err(AdversaryError::BadProbability(crash_prob));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids: Vec<ProcessId> = (0..spec.n).map(ProcessId).collect();
        ids.shuffle(&mut rng);
        let candidates: BTreeSet<ProcessId> = ids.into_iter().take(spec.f).collect();
        let crashing = candidates
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(crash_prob))
            .collect();
        Ok(RandomCrash {
            rng,
            delays,
            candidates,
            crashing,
            n: spec.n,
            broadcast_budget: protocol.broadcast_budget(spec),
        })
    }

    /// The processes the policy may crash; the faulty set is a subset.
    pub fn candidates(&self) -> &BTreeSet<ProcessId> {
        &self.candidates
    }
}

impl AdversaryPolicy for RandomCrash {
    fn faulty(&self) -> BTreeSet<ProcessId> {
        self.crashing.clone()
    }

    fn crash_cut(&mut self, process: ProcessId) -> Option<CrashCut> {
        if !self.crashing.contains(&process) {
            return None;
        }
        let full_broadcasts = self.rng.gen_range(0..=self.broadcast_budget);
        let partial = (0..self.n)
            .map(ProcessId)
            .filter(|_| self.rng.gen_bool(0.5))
            .collect();
        Some(CrashCut {
            full_broadcasts,
            partial,
        })
    }

    fn delay(&mut self, _: ProcessId, _: ProcessId, _: &Message, _: SimTime) -> SimTime {
        *self.delays.choose(&mut self.rng).expect("menu checked non-empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spider::FailureModel;

    fn menu() -> Vec<SimTime> {
        vec![SimTime::new(1, 4), SimTime::new(1, 2), SimTime::ONE]
    }

    fn spec() -> TaskSpec {
        TaskSpec::new(2, 2, 5, 2, FailureModel::Crash).unwrap()
    }

    #[test]
    fn no_crashes_at_probability_zero() {
        for seed in 0..20 {
            let a = RandomCrash::new(&spec(), ProtocolKind::CrashCc, seed, 0.0, menu()).unwrap();
            assert!(a.faulty().is_empty());
        }
    }

    #[test]
    fn crashes_stay_inside_candidate_pair() {
        let mut seen = BTreeSet::new();
        for seed in 0..100 {
            let a = RandomCrash::new(&spec(), ProtocolKind::CrashCc, seed, 0.7, menu()).unwrap();
            assert_eq!(a.candidates().len(), 2);
            assert!(a.faulty().is_subset(a.candidates()));
            seen.extend(a.faulty());
        }
        assert_eq!(seen.len(), 5, "over many seeds every process gets picked");
    }

    #[test]
    fn replay_is_identical() {
        let draw = |seed| {
            let mut a = RandomCrash::new(&spec(), ProtocolKind::CrashCc, seed, 1.0, menu()).unwrap();
            let m = Message::new(crate::protocols::MsgKind::Input, crate::spider::Value(0).into(), ProcessId(0));
            let cuts: Vec<_> = (0..5).map(|p| a.crash_cut(ProcessId(p))).collect();
            let delays: Vec<_> = (0..50).map(|_| a.delay(ProcessId(0), ProcessId(1), &m, SimTime::ZERO)).collect();
            (a.faulty(), cuts, delays)
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = ProtocolKind::CrashCc;
        assert!(RandomCrash::new(&spec(), p, 0, 1.5, menu()).is_err());
        assert!(RandomCrash::new(&spec(), p, 0, 0.5, vec![]).is_err());
        assert!(RandomCrash::new(&spec(), p, 0, 0.5, vec![SimTime::ZERO]).is_err());
    }
}
