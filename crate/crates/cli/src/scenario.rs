//! Turning a configuration into simulations and explorations, and
//! rendering the results as stable text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use cc_core::adversaries::{
    binding_explorer_batch, last_f, AdversaryError, ExploreError, ExplorerBounds, SlowDecision,
    ExplorerReport,
};
use cc_core::simnet::SimError;
use cc_core::verify::{check_binding_oracle, Check};
use cc_core::{
    AdversaryPolicy, BuildOptions, ByzEquivocator, ExecutionTrace, FailureModel, FixedDelay,
    Outcome, ProcessId, RandomCrash, SimConfig, Value, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{AdversarySpec, InputSpec, ScenarioConfig};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error("{0}")]
    Unsupported(String),
}

/// Aggregate status of a rendered result, ordered from best to worst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn of(outcome: Outcome) -> Status {
        match outcome {
            Outcome::Pass => Status::Pass,
            Outcome::Inconclusive => Status::Inconclusive,
            Outcome::Fail => Status::Fail,
        }
    }
}

/// A finished simulation, or the liveness failure that stopped it.
pub type RunResult = Result<ExecutionTrace, SimError>;

pub fn build_options(config: &ScenarioConfig) -> BuildOptions {
    BuildOptions {
        allow_underresilient: config.allow_underresilient,
        mutation: config.mutation,
    }
}

/// The input assignment of one simulation.
pub fn inputs_for(config: &ScenarioConfig, seed: u64) -> Result<Vec<Value>, ScenarioError> {
    if config.adversary == AdversarySpec::SlowDecision {
        return Ok(SlowDecision::new(config.epsilon, config.f)?.inputs());
    }
    match &config.inputs {
        InputSpec::Explicit(vs) => Ok(vs.clone()),
        InputSpec::Unanimous(v) => Ok(vec![*v; config.n]),
        InputSpec::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = config.value_count as u16;
            Ok((0..config.n).map(|_| Value(rng.gen_range(0..k))).collect())
        }
        InputSpec::All => Err(ScenarioError::Unsupported(
            "inputs=all is only meaningful for explore".into(),
        )),
    }
}

fn adversary_for(
    config: &ScenarioConfig,
    seed: u64,
) -> Result<Box<dyn AdversaryPolicy>, ScenarioError> {
    let spec = config.spec();
    let faulty = || -> Vec<ProcessId> {
        match &config.faulty {
            Some(ps) => ps.clone(),
            None => last_f(&spec).collect(),
        }
    };
    Ok(match &config.adversary {
        AdversarySpec::FailureFree => Box::new(FixedDelay::new(config.delay)),
        AdversarySpec::Silent => Box::new(FixedDelay::new(config.delay).with_silent(faulty())),
        AdversarySpec::RandomCrash => Box::new(RandomCrash::new(
            &spec,
            config.protocol,
            seed,
            config.crash_prob,
            config.delays.clone(),
        )?),
        AdversarySpec::Byzantine(strategy) => {
            let delays = config.delays.clone();
            Box::new(match &config.faulty {
                Some(ps) => ByzEquivocator::with_faulty(&spec, seed, *strategy, delays, ps.clone())?,
                None => ByzEquivocator::new(&spec, seed, *strategy, delays)?,
            })
        }
        AdversarySpec::SlowDecision => Box::new(SlowDecision::new(config.epsilon, config.f)?),
    })
}

/// Runs one simulation. A liveness failure is returned as the inner error;
/// anything else is a configuration problem.
pub fn simulate(config: &ScenarioConfig, seed: u64) -> Result<RunResult, ScenarioError> {
    let inputs = inputs_for(config, seed)?;
    let mut adversary = adversary_for(config, seed)?;
    let mut sim = SimConfig::new(config.spec(), config.protocol, inputs);
    sim.options = build_options(config);
    match cc_core::run(&sim, adversary.as_mut()) {
        Ok(trace) => Ok(Ok(trace)),
        Err(e @ SimError::Liveness { .. }) => Ok(Err(e)),
        Err(e) => Err(e.into()),
    }
}

/// Verdicts of the requested checks. A run that never finished fails
/// termination and leaves the rest inconclusive.
pub fn verdicts(checks: &[Check], result: &RunResult) -> Vec<Verdict> {
    match result {
        Ok(trace) => checks.iter().map(|c| c.run(trace)).collect(),
        Err(e) => checks
            .iter()
            .map(|c| match c {
                Check::Termination => Verdict::fail(c.as_str(), e.to_string()),
                _ => Verdict::inconclusive(c.as_str(), "run did not finish"),
            })
            .collect(),
    }
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn header(config: &ScenarioConfig, command: &str) -> String {
    format!(
        "{command} protocol={} n={} f={} R={} value_count={} centered={} adversary={}",
        config.protocol,
        config.n,
        config.f,
        config.refinement,
        config.value_count,
        config.centered,
        config.adversary
    )
}

/// Text report of a single simulation.
pub fn render_run(config: &ScenarioConfig, seed: u64, result: &RunResult) -> (String, Status) {
    let mut out = format!("{} seed={seed}\n", header(config, "run"));
    if let Ok(trace) = result {
        let _ = writeln!(out, "inputs={} faulty={{{}}}", join(&trace.inputs), join(&trace.faulty));
        for p in trace.correct_processes() {
            match trace.decisions[p.0] {
                Some((v, t)) => {
                    let _ = writeln!(out, "decide p{p} {v} t={t}");
                }
                None => {
                    let _ = writeln!(out, "decide p{p} none");
                }
            }
        }
        let time = trace
            .scaled_decision_time()
            .map_or_else(|e| format!("n/a ({e})"), |t| t.to_string());
        let _ = writeln!(
            out,
            "scaled_time={time} correct_messages={}",
            trace.totals.correct_total()
        );
    }
    let verdicts = verdicts(&config.checks, result);
    let mut status = Status::Pass;
    for v in &verdicts {
        status = status.max(Status::of(v.outcome));
        let _ = writeln!(out, "{v}");
    }
    (out, status)
}

/// Text report of many simulations: one line per check plus the binding
/// oracle over runs that share an input assignment. An oracle that does
/// not apply to the protocol is reported but does not affect the status.
pub fn render_fuzz(
    config: &ScenarioConfig,
    seeds: &[u64],
    results: &[RunResult],
) -> (String, Status) {
    let mut out = format!(
        "{} runs={} seeds={}..{}\n",
        header(config, "fuzz"),
        seeds.len(),
        seeds.first().copied().unwrap_or(0),
        seeds.last().copied().unwrap_or(0)
    );
    let per_run: Vec<Vec<Verdict>> = results.iter().map(|r| verdicts(&config.checks, r)).collect();
    let mut status = Status::Pass;
    for (i, check) in config.checks.iter().enumerate() {
        let mut fails = 0;
        let mut inconclusive = 0;
        let mut first = None;
        for (seed, vs) in seeds.iter().zip(&per_run) {
            match vs[i].outcome {
                Outcome::Fail => {
                    fails += 1;
                    first.get_or_insert_with(|| (seed, vs[i].witness.clone()));
                }
                Outcome::Inconclusive => inconclusive += 1,
                Outcome::Pass => {}
            }
        }
        let outcome = if fails > 0 {
            Outcome::Fail
        } else if inconclusive == seeds.len() {
            Outcome::Inconclusive
        } else {
            Outcome::Pass
        };
        status = status.max(Status::of(outcome));
        let _ = write!(
            out,
            "prop={check} result={outcome} fails={fails} inconclusive={inconclusive}"
        );
        if let Some((seed, witness)) = first {
            let _ = write!(out, " first_seed={seed} witness={}", witness.unwrap_or_default());
        }
        out.push('\n');
    }
    let (line, oracle) = binding_oracle_line(results);
    status = status.max(oracle);
    out.push_str(&line);
    (out, status)
}

fn binding_oracle_line(results: &[RunResult]) -> (String, Status) {
    // Under malicious faults the branch follows the correct inputs, so runs
    // are only comparable when they also share the faulty set.
    let mut groups: BTreeMap<(Vec<Value>, BTreeSet<ProcessId>), Vec<ExecutionTrace>> =
        BTreeMap::new();
    for trace in results.iter().flatten() {
        let faulty = match trace.spec.failure_model {
            FailureModel::Malicious => trace.faulty.clone(),
            FailureModel::Crash => BTreeSet::new(),
        };
        groups.entry((trace.inputs.clone(), faulty)).or_default().push(trace.clone());
    }
    let verdicts: Vec<(Vec<Value>, Verdict)> = groups
        .into_iter()
        .map(|((inputs, _), traces)| {
            let v = check_binding_oracle(&traces);
            (inputs, v)
        })
        .collect();
    let groups = verdicts.len();
    let failed = verdicts.iter().find(|(_, v)| v.outcome == Outcome::Fail);
    let all_inconclusive = verdicts.iter().all(|(_, v)| v.outcome == Outcome::Inconclusive);
    match (failed, all_inconclusive) {
        (Some((inputs, v)), _) => (
            format!(
                "prop=binding_oracle result=fail assignments={groups} inputs={} witness={}\n",
                join(inputs),
                v.witness.clone().unwrap_or_default()
            ),
            Status::Fail,
        ),
        (None, true) => {
            let why = verdicts
                .first()
                .and_then(|(_, v)| v.witness.clone())
                .unwrap_or_else(|| "no finished runs".into());
            (
                format!("prop=binding_oracle result=inconclusive assignments={groups} witness={why}\n"),
                Status::Pass,
            )
        }
        (None, false) => (
            format!("prop=binding_oracle result=pass assignments={groups}\n"),
            Status::Pass,
        ),
    }
}

/// The faulty set and the input assignments an exploration covers.
pub fn explore_instances(
    config: &ScenarioConfig,
) -> Result<(BTreeSet<ProcessId>, Vec<Vec<Value>>), ScenarioError> {
    let spec = config.spec();
    let faulty: BTreeSet<ProcessId> = match &config.faulty {
        Some(ps) => ps.iter().copied().collect(),
        None => last_f(&spec).collect(),
    };
    let assignments = match &config.inputs {
        InputSpec::All => {
            // Malicious processes ignore their inputs, so only the correct
            // ones vary; crash-faulty processes run the protocol.
            let varying: Vec<usize> = (0..config.n)
                .filter(|i| {
                    spec.failure_model == FailureModel::Crash || !faulty.contains(&ProcessId(*i))
                })
                .collect();
            let k = config.value_count;
            let total = k
                .checked_pow(varying.len() as u32)
                .filter(|&t| t <= 1 << 16)
                .ok_or_else(|| ScenarioError::Unsupported("too many input assignments".into()))?;
            (0..total)
                .map(|mut code| {
                    let mut inputs = vec![Value(0); config.n];
                    for &i in varying.iter().rev() {
                        inputs[i] = Value((code % k) as u16);
                        code /= k;
                    }
                    inputs
                })
                .collect()
        }
        _ => vec![inputs_for(config, config.seed)?],
    };
    Ok((faulty, assignments))
}

pub fn explore_all(
    config: &ScenarioConfig,
    faulty: &BTreeSet<ProcessId>,
    assignments: &[Vec<Value>],
) -> Result<Vec<(Vec<Value>, ExplorerReport)>, ScenarioError> {
    let reports = binding_explorer_batch(
        &config.spec(),
        config.protocol,
        assignments,
        faulty,
        build_options(config),
        ExplorerBounds {
            max_states: config.max_states,
        },
    )?;
    Ok(assignments.iter().cloned().zip(reports).collect())
}

/// Text report of an exploration over several input assignments.
pub fn render_explore(
    config: &ScenarioConfig,
    faulty: &BTreeSet<ProcessId>,
    reports: &[(Vec<Value>, ExplorerReport)],
) -> (String, Status) {
    let mut out = format!(
        "{} faulty={{{}}} max_states={}\n",
        header(config, "explore"),
        join(faulty),
        config.max_states
    );
    let mut status = Status::Pass;
    for (inputs, report) in reports {
        status = status.max(Status::of(report.outcome));
        let _ = writeln!(out, "inputs={} {report}", join(inputs));
        if let Some(w) = &report.witness {
            let _ = writeln!(out, "  witness {w}");
        }
    }
    let total: usize = reports.iter().map(|(_, r)| r.states).sum();
    let outcome = match status {
        Status::Pass => Outcome::Pass,
        Status::Inconclusive => Outcome::Inconclusive,
        Status::Fail => Outcome::Fail,
    };
    let _ = writeln!(
        out,
        "prop=binding result={outcome} assignments={} states={total}",
        reports.len()
    );
    (out, status)
}
