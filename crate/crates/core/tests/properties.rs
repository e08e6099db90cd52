use std::collections::BTreeSet;

use cc_core::verify::{check_broadcast_budget, check_echo3_uniqueness, check_termination};
use cc_core::{
    run, AdversaryPolicy, ByzEquivocator, ByzStrategy, ExecutionTrace, FailureModel, ProtocolKind,
    RandomCrash, SimConfig, SimTime, SpiderGraph, TaskSpec, Value, Vertex,
};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = SpiderGraph> {
    (1usize..=6, 1u8..=3, any::<bool>())
        .prop_filter_map("valid graph", |(k, r, c)| SpiderGraph::new(k, r, c).ok())
}

fn delays() -> Vec<SimTime> {
    vec![SimTime::new(1, 4), SimTime::new(1, 2), SimTime::ONE]
}

/// A resilient instance of `protocol` with random inputs.
fn instance(protocol: ProtocolKind, refinement: u8, raw_inputs: &[u16]) -> (TaskSpec, Vec<Value>) {
    let (n, f, model) = match protocol {
        ProtocolKind::CrashCc => (5, 2, FailureModel::Crash),
        ProtocolKind::TrimCc => (6, 1, FailureModel::Malicious),
        ProtocolKind::EchoCc => (4, 1, FailureModel::Malicious),
        ProtocolKind::OneRoundCrash => (9, 2, FailureModel::Crash),
        ProtocolKind::OneRoundByz => (13, 1, FailureModel::Malicious),
    };
    let refinement = if protocol.supports_refinement(refinement) { refinement } else { 2 };
    let spec = TaskSpec::new(3, refinement, n, f, model).unwrap();
    let inputs = (0..n).map(|i| Value(raw_inputs[i % raw_inputs.len()] % 3)).collect();
    (spec, inputs)
}

fn simulate(protocol: ProtocolKind, refinement: u8, raw: &[u16], seed: u64) -> ExecutionTrace {
    let (spec, inputs) = instance(protocol, refinement, raw);
    let mut adversary: Box<dyn AdversaryPolicy> = match spec.failure_model {
        FailureModel::Crash => Box::new(RandomCrash::new(&spec, protocol, seed, 0.5, delays()).unwrap()),
        FailureModel::Malicious => {
            Box::new(ByzEquivocator::new(&spec, seed, ByzStrategy::Random, delays()).unwrap())
        }
    };
    run(&SimConfig::new(spec, protocol, inputs), adversary.as_mut()).unwrap()
}

fn protocol_strategy() -> impl Strategy<Value = ProtocolKind> {
    prop_oneof![
        Just(ProtocolKind::CrashCc),
        Just(ProtocolKind::TrimCc),
        Just(ProtocolKind::EchoCc),
        Just(ProtocolKind::OneRoundCrash),
        Just(ProtocolKind::OneRoundByz),
    ]
}

proptest! {
    #[test]
    fn distance_is_a_metric(g in graph_strategy(), picks in prop::collection::vec(any::<prop::sample::Index>(), 3)) {
        let vs = g.vertices();
        let [a, b, c] = [0, 1, 2].map(|i| vs[picks[i].index(vs.len())]);
        let d = |x: Vertex, y: Vertex| g.distance(x, y).unwrap();
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert_eq!(d(a, b) == 0, a == b);
        prop_assert!(d(a, c) <= d(a, b) + d(b, c));
    }

    #[test]
    fn minimal_subtree_is_connected_and_minimal(g in graph_strategy(), mask in 1u32..64) {
        let leaves: BTreeSet<Value> = g.values().filter(|v| mask >> v.0 & 1 == 1).collect();
        prop_assume!(!leaves.is_empty());
        let tree = g.minimal_subtree(&leaves).unwrap();
        let members: Vec<Vertex> = tree.vertices().iter().copied().collect();
        for &v in &leaves {
            prop_assert!(tree.contains(g.leaf(v)));
        }
        let connected = |set: &[Vertex]| {
            let mut seen = vec![set[0]];
            let mut i = 0;
            while i < seen.len() {
                let x = seen[i];
                for &y in set {
                    if !seen.contains(&y) && g.distance(x, y) == Ok(1) {
                        seen.push(y);
                    }
                }
                i += 1;
            }
            seen.len() == set.len()
        };
        prop_assert!(connected(&members));
        // Dropping any vertex loses a leaf or disconnects the rest.
        for skip in 0..members.len() {
            let rest: Vec<Vertex> = members.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
            let keeps_leaves = leaves.iter().all(|&v| rest.contains(&g.leaf(v)));
            prop_assert!(rest.is_empty() || !keeps_leaves || !connected(&rest));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn runs_are_deterministic(p in protocol_strategy(), r in 1u8..=2, raw in prop::collection::vec(0u16..3, 1..8), seed: u64) {
        let a = simulate(p, r, &raw, seed);
        let b = simulate(p, r, &raw, seed);
        prop_assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn traces_respect_the_model(p in protocol_strategy(), r in 1u8..=2, raw in prop::collection::vec(0u16..3, 1..8), seed: u64) {
        let t = simulate(p, r, &raw, seed);
        prop_assert!(t.check_conformance().is_ok(), "{:?}", t.check_conformance());
        prop_assert!(check_termination(&t).passed(), "{}", check_termination(&t));
        prop_assert!(check_broadcast_budget(&t).passed(), "{}", check_broadcast_budget(&t));
        prop_assert!(check_echo3_uniqueness(&t).passed(), "{}", check_echo3_uniqueness(&t));
    }
}
