use std::hint::black_box;

use cc_bench::{delays, instance, split_inputs};
use cc_core::{run, FixedDelay, ProtocolKind, RandomCrash, SimConfig, SimTime};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const PROTOCOLS: [ProtocolKind; 5] = [
    ProtocolKind::CrashCc,
    ProtocolKind::TrimCc,
    ProtocolKind::EchoCc,
    ProtocolKind::OneRoundCrash,
    ProtocolKind::OneRoundByz,
];

fn failure_free(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate/failure_free");
    for protocol in PROTOCOLS {
        for refinement in 1..=2u8 {
            if !protocol.supports_refinement(refinement) {
                continue;
            }
            let spec = instance(protocol, refinement);
            let config = SimConfig::new(spec, protocol, split_inputs(spec.n));
            group.bench_with_input(
                BenchmarkId::new(format!("{protocol}"), refinement),
                &config,
                |b, config| {
                    b.iter(|| {
                        let mut adversary = FixedDelay::new(SimTime::ONE);
                        black_box(run(config, &mut adversary).unwrap())
                    })
                },
            );
        }
    }
    group.finish();
}

fn random_crash(c: &mut Criterion) {
    let spec = instance(ProtocolKind::CrashCc, 2);
    let config = SimConfig::new(spec, ProtocolKind::CrashCc, split_inputs(spec.n));
    c.bench_function("simulate/random_crash/crash_cc", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            let mut adversary =
                RandomCrash::new(&spec, ProtocolKind::CrashCc, seed, 0.5, delays()).unwrap();
            black_box(run(&config, &mut adversary).unwrap())
        })
    });
}

criterion_group!(benches, failure_free, random_crash);
criterion_main!(benches);
