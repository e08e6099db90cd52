//! Scenario configuration: a flat `key = value` text format.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may repeat;
//! for list keys (`check`, `faulty`) every occurrence adds to the list, for
//! the others the last occurrence wins. Command-line flags are applied
//! after the file, with the same keys.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use cc_core::adversaries::ByzStrategy;
use cc_core::protocols::Mutation;
use cc_core::verify::Check;
use cc_core::{FailureModel, ProcessId, ProtocolError, ProtocolKind, SimTime, TaskSpec, Value};
use thiserror::Error;

/// Where a configuration entry came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag(&'static str),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag(name) => write!(f, "flag --{name}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}: {message}")]
    Entry { origin: Origin, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

/// Parses the text format into entries without interpreting them.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let origin = Origin::Line(i + 1);
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Entry {
                origin,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Entry {
                origin,
                message: "empty key".into(),
            });
        }
        entries.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            origin,
        });
    }
    Ok(entries)
}

pub fn read_entries(path: &Path) -> Result<Vec<Entry>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_entries(&text)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSpec {
    Explicit(Vec<Value>),
    /// Uniform random values drawn from the run seed.
    Random,
    Unanimous(Value),
    /// Every assignment of the correct processes' inputs (explore only).
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdversarySpec {
    /// Every message takes one time unit; nobody fails.
    FailureFree,
    /// Every message takes one time unit; the faulty processes never send.
    Silent,
    RandomCrash,
    Byzantine(ByzStrategy),
    SlowDecision,
}

impl FromStr for AdversarySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "failure_free" => Ok(AdversarySpec::FailureFree),
            "silent" => Ok(AdversarySpec::Silent),
            "random_crash" => Ok(AdversarySpec::RandomCrash),
            "slow_decision" => Ok(AdversarySpec::SlowDecision),
            _ => match s.strip_prefix("byz:") {
                Some(strategy) => Ok(AdversarySpec::Byzantine(strategy.parse()?)),
                None => Err(format!("unknown adversary `{s}`")),
            },
        }
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::FailureFree => f.write_str("failure_free"),
            AdversarySpec::Silent => f.write_str("silent"),
            AdversarySpec::RandomCrash => f.write_str("random_crash"),
            AdversarySpec::Byzantine(s) => write!(f, "byz:{s}"),
            AdversarySpec::SlowDecision => f.write_str("slow_decision"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Run,
    Explore,
}

/// A fully interpreted scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    /// What a regression file runs; ignored elsewhere.
    pub command: Command,
    pub protocol: ProtocolKind,
    pub n: usize,
    pub f: usize,
    pub refinement: u8,
    pub value_count: usize,
    pub centered: bool,
    pub inputs: InputSpec,
    pub adversary: AdversarySpec,
    pub seed: u64,
    /// Delay menu of the randomized adversaries.
    pub delays: Vec<SimTime>,
    /// Delay of `failure_free` and `silent`.
    pub delay: SimTime,
    pub crash_prob: f64,
    pub epsilon: SimTime,
    pub faulty: Option<Vec<ProcessId>>,
    pub checks: Vec<Check>,
    pub repeat: usize,
    pub max_states: usize,
    pub allow_underresilient: bool,
    pub mutation: Option<Mutation>,
}

fn parse<T: FromStr>(entry: &Entry) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    entry.value.parse().map_err(|e: T::Err| ConfigError::Entry {
        origin: entry.origin.clone(),
        message: format!("bad value `{}` for `{}`: {e}", entry.value, entry.key),
    })
}

fn parse_list<T: FromStr>(entry: &Entry) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    entry
        .value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|e: T::Err| ConfigError::Entry {
                origin: entry.origin.clone(),
                message: format!("bad item `{s}` in `{}`: {e}", entry.key),
            })
        })
        .collect()
}

fn parse_inputs(entry: &Entry) -> Result<InputSpec, ConfigError> {
    match entry.value.as_str() {
        "random" => Ok(InputSpec::Random),
        "all" => Ok(InputSpec::All),
        v => match v.strip_prefix("unanimous:") {
            Some(x) => Ok(InputSpec::Unanimous(Value(parse_u16(entry, x)?))),
            None => Ok(InputSpec::Explicit(
                parse_list::<u16>(entry)?.into_iter().map(Value).collect(),
            )),
        },
    }
}

fn parse_u16(entry: &Entry, s: &str) -> Result<u16, ConfigError> {
    s.parse().map_err(|e| ConfigError::Entry {
        origin: entry.origin.clone(),
        message: format!("bad value `{s}`: {e}"),
    })
}

fn parse_checks(entry: &Entry) -> Result<Vec<Check>, ConfigError> {
    if entry.value == "all" {
        return Ok(Check::ALL.to_vec());
    }
    parse_list(entry)
}

fn parse_bool(entry: &Entry) -> Result<bool, ConfigError> {
    match entry.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(ConfigError::Entry {
            origin: entry.origin.clone(),
            message: format!("expected true or false, got `{other}`"),
        }),
    }
}

impl ScenarioConfig {
    /// Interprets entries in order. Unknown keys are errors.
    pub fn from_entries(entries: &[Entry]) -> Result<ScenarioConfig, ConfigError> {
        let mut command = Command::Run;
        let mut protocol = None;
        let (mut n, mut f) = (None, None);
        let mut refinement = 1;
        let mut value_count = 2;
        let mut centered = true;
        let mut inputs = InputSpec::Random;
        let mut adversary = AdversarySpec::Silent;
        let mut seed = 0;
        let mut delays = vec![SimTime::new(1, 2), SimTime::ONE];
        let mut delay = SimTime::ONE;
        let mut crash_prob = 0.5;
        let mut epsilon = SimTime::new(1, 8);
        let mut faulty: Option<Vec<ProcessId>> = None;
        let mut checks: Option<Vec<Check>> = None;
        let mut repeat = 1;
        let mut max_states = 10_000_000;
        let mut allow_underresilient = false;
        let mut mutation = None;
        for e in entries {
            match e.key.as_str() {
                "command" => {
                    command = match e.value.as_str() {
                        "run" => Command::Run,
                        "explore" => Command::Explore,
                        other => {
                            return Err(ConfigError::Entry {
                                origin: e.origin.clone(),
                                message: format!("unknown command `{other}`"),
                            })
                        }
                    }
                }
                "protocol" => protocol = Some(parse(e)?),
                "n" => n = Some(parse(e)?),
                "f" => f = Some(parse(e)?),
                "R" => refinement = parse(e)?,
                "value_count" => value_count = parse(e)?,
                "centered" => centered = parse_bool(e)?,
                "inputs" => inputs = parse_inputs(e)?,
                "adversary" => adversary = parse(e)?,
                "seed" => seed = parse(e)?,
                "delays" => delays = parse_list(e)?,
                "delay" => delay = parse(e)?,
                "crash_prob" => crash_prob = parse(e)?,
                "epsilon" => epsilon = parse(e)?,
                "faulty" => faulty
                    .get_or_insert_with(Vec::new)
                    .extend(parse_list::<usize>(e)?.into_iter().map(ProcessId)),
                "check" => checks.get_or_insert_with(Vec::new).extend(parse_checks(e)?),
                "repeat" => repeat = parse(e)?,
                "max_states" => max_states = parse(e)?,
                "allow_underresilient" => allow_underresilient = parse_bool(e)?,
                "mutation" => mutation = Some(parse(e)?),
                other => {
                    return Err(ConfigError::Entry {
                        origin: e.origin.clone(),
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        let mut checks = checks.unwrap_or_else(|| Check::ALL.to_vec());
        checks.sort();
        checks.dedup();
        let config = ScenarioConfig {
            command,
            protocol: protocol.ok_or(ConfigError::Missing("protocol"))?,
            n: n.ok_or(ConfigError::Missing("n"))?,
            f: f.ok_or(ConfigError::Missing("f"))?,
            refinement,
            value_count,
            centered,
            inputs,
            adversary,
            seed,
            delays,
            delay,
            crash_prob,
            epsilon,
            faulty,
            checks,
            repeat,
            max_states,
            allow_underresilient,
            mutation,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn spec(&self) -> TaskSpec {
        TaskSpec {
            value_count: self.value_count,
            refinement: self.refinement,
            centered: self.centered,
            n: self.n,
            f: self.f,
            failure_model: self.protocol.failure_model(),
        }
    }

    /// Whether the configuration deliberately violates the protocol's
    /// resilience bound.
    pub fn underresilient(&self) -> bool {
        matches!(
            self.protocol.check(&self.spec(), false),
            Err(ProtocolError::Underresilient { .. })
        )
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let spec = self.spec();
        spec.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.protocol
            .check(&spec, self.allow_underresilient)
            .map_err(|e| match e {
                ProtocolError::Underresilient { .. } => {
                    ConfigError::Invalid(format!("{e} (pass --allow-underresilient to run anyway)"))
                }
                e => ConfigError::Invalid(e.to_string()),
            })?;
        let check_value = |v: Value| {
            if v.index() >= self.value_count {
                Err(ConfigError::Invalid(format!(
                    "input {v} outside the value set of size {}",
                    self.value_count
                )))
            } else {
                Ok(())
            }
        };
        match &self.inputs {
            InputSpec::Explicit(vs) => {
                if vs.len() != self.n {
                    return Err(ConfigError::Invalid(format!(
                        "{} inputs given for n={}",
                        vs.len(),
                        self.n
                    )));
                }
                vs.iter().try_for_each(|&v| check_value(v))?;
            }
            InputSpec::Unanimous(v) => check_value(*v)?,
            InputSpec::Random | InputSpec::All => {}
        }
        if let Some(faulty) = &self.faulty {
            if faulty.len() > self.f {
                return Err(ConfigError::Invalid(format!(
                    "{} faulty processes exceed f={}",
                    faulty.len(),
                    self.f
                )));
            }
            if let Some(p) = faulty.iter().find(|p| p.0 >= self.n) {
                return Err(ConfigError::Invalid(format!("faulty process {p} out of range")));
            }
        }
        if self.delay <= SimTime::ZERO
            || self.delays.is_empty()
            || self.delays.iter().any(|d| *d <= SimTime::ZERO)
        {
            return Err(ConfigError::Invalid("delays must be positive and non-empty".into()));
        }
        if !(0.0..=1.0).contains(&self.crash_prob) {
            return Err(ConfigError::Invalid(format!(
                "crash_prob {} outside [0, 1]",
                self.crash_prob
            )));
        }
        if self.repeat == 0 {
            return Err(ConfigError::Invalid("repeat must be at least 1".into()));
        }
        let takes_faulty = matches!(
            self.adversary,
            AdversarySpec::Silent | AdversarySpec::Byzantine(_)
        );
        if self.faulty.is_some() && !takes_faulty && self.command == Command::Run {
            return Err(ConfigError::Invalid(format!(
                "adversary {} picks its own faulty set",
                self.adversary
            )));
        }
        if self.adversary == AdversarySpec::SlowDecision
            && matches!(self.inputs, InputSpec::Explicit(_) | InputSpec::Unanimous(_))
        {
            return Err(ConfigError::Invalid(
                "slow_decision fixes the inputs itself".into(),
            ));
        }
        match (&self.adversary, spec.failure_model) {
            (AdversarySpec::RandomCrash, FailureModel::Malicious) => Err(ConfigError::Invalid(
                "random_crash needs a crash-model protocol".into(),
            )),
            (AdversarySpec::Byzantine(s), FailureModel::Crash) if *s != ByzStrategy::Silent => {
                Err(ConfigError::Invalid(format!(
                    "byz:{s} needs a malicious-model protocol"
                )))
            }
            _ => Ok(()),
        }
    }
}
