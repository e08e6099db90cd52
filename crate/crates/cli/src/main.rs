//! `ccsim`: simulate, fuzz and exhaustively explore the connected
//! consensus protocols.
//!
//! Exit status is 0 when every check passes, 1 when one fails, 2 on a
//! usage or configuration error and 3 when a result is inconclusive.

mod config;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use config::{Command, ConfigError, Entry, Origin, ScenarioConfig};
use scenario::{RunResult, ScenarioError, Status};

#[derive(Parser)]
#[command(name = "ccsim", version, about = "Connected consensus simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One simulation with the configured seed.
    Run(RunArgs),
    /// `repeat` simulations with consecutive seeds, in parallel.
    Fuzz(RunArgs),
    /// Exhaustive Binding check over every delivery order.
    Explore(ScenarioArgs),
    /// Replays pinned scenarios and compares them with their golden output.
    Regress(RegressArgs),
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Write the execution trace here (a directory for `fuzz`).
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct RegressArgs {
    #[arg(long, default_value = "regress")]
    dir: PathBuf,
    /// Overwrite the golden files with the current output.
    #[arg(long)]
    bless: bool,
}

/// Every flag overrides the key of the same name in the config file.
#[derive(Args, Default)]
struct ScenarioArgs {
    /// `key = value` scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    f: Option<String>,
    /// Refinement of the spider graph.
    #[arg(long = "R", short = 'R')]
    refinement: Option<String>,
    #[arg(long)]
    value_count: Option<String>,
    #[arg(long)]
    centered: Option<String>,
    /// Comma-separated list, `random`, `unanimous:<v>` or `all`.
    #[arg(long)]
    inputs: Option<String>,
    /// `failure_free`, `silent`, `random_crash`, `byz:<strategy>` or `slow_decision`.
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long, env = "CC_SEED")]
    seed: Option<String>,
    /// Delay menu, e.g. `1/2,1`.
    #[arg(long)]
    delays: Option<String>,
    #[arg(long)]
    delay: Option<String>,
    #[arg(long)]
    crash_prob: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    faulty: Option<String>,
    /// Check names or `all`.
    #[arg(long)]
    check: Vec<String>,
    #[arg(long)]
    repeat: Option<String>,
    #[arg(long)]
    max_states: Option<String>,
    #[arg(long)]
    allow_underresilient: bool,
    #[arg(long, hide = true)]
    mutation: Option<String>,
}

impl ScenarioArgs {
    fn entries(&self) -> Result<Vec<Entry>, ConfigError> {
        let mut entries = match &self.config {
            Some(path) => config::read_entries(path)?,
            None => Vec::new(),
        };
        let flags: [(&'static str, &'static str, &Option<String>); 17] = [
            ("protocol", "protocol", &self.protocol),
            ("n", "n", &self.n),
            ("f", "f", &self.f),
            ("R", "R", &self.refinement),
            ("value_count", "value-count", &self.value_count),
            ("centered", "centered", &self.centered),
            ("inputs", "inputs", &self.inputs),
            ("adversary", "adversary", &self.adversary),
            ("seed", "seed", &self.seed),
            ("delays", "delays", &self.delays),
            ("delay", "delay", &self.delay),
            ("crash_prob", "crash-prob", &self.crash_prob),
            ("epsilon", "epsilon", &self.epsilon),
            ("faulty", "faulty", &self.faulty),
            ("repeat", "repeat", &self.repeat),
            ("max_states", "max-states", &self.max_states),
            ("mutation", "mutation", &self.mutation),
        ];
        let flag = |key: &str, name: &'static str, value: &str| Entry {
            key: key.to_string(),
            value: value.to_string(),
            origin: Origin::Flag(name),
        };
        for (key, name, value) in flags {
            if let Some(v) = value {
                entries.push(flag(key, name, v));
            }
        }
        if !self.check.is_empty() {
            // Flags replace the file's checks rather than adding to them.
            entries.retain(|e| e.key != "check");
            entries.extend(self.check.iter().map(|c| flag("check", "check", c)));
        }
        if self.allow_underresilient {
            entries.push(flag("allow_underresilient", "allow-underresilient", "true"));
        }
        Ok(entries)
    }

    fn load(&self) -> Result<ScenarioConfig, ConfigError> {
        ScenarioConfig::from_entries(&self.entries()?)
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Io(String),
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn exit_code(status: Status) -> ExitCode {
    ExitCode::from(match status {
        Status::Pass => 0,
        Status::Fail => 1,
        Status::Inconclusive => 3,
    })
}

/// Prefix for results produced outside the resilience bound.
fn resilience_banner(config: &ScenarioConfig) -> String {
    if config.underresilient() {
        eprintln!(
            "warning: {} with n={} f={} is below its resilience bound",
            config.protocol, config.n, config.f
        );
        "# non-regression: under-resilient configuration\n".to_string()
    } else {
        String::new()
    }
}

fn write_trace(path: &Path, result: &RunResult) -> Result<(), CliError> {
    let text = match result {
        Ok(trace) => trace.to_text(),
        Err(e) => format!("# {e}\n"),
    };
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn run_command(args: &RunArgs) -> Result<Status, CliError> {
    let config = args.scenario.load()?;
    let result = scenario::simulate(&config, config.seed)?;
    if let Some(path) = &args.trace_out {
        write_trace(path, &result)?;
    }
    let (text, status) = scenario::render_run(&config, config.seed, &result);
    print!("{}{text}", resilience_banner(&config));
    Ok(status)
}

fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CC_WORKERS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Io(format!("CC_WORKERS: bad worker count `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Io(e.to_string()))
}

fn fuzz_command(args: &RunArgs) -> Result<Status, CliError> {
    let config = args.scenario.load()?;
    let seeds: Vec<u64> = (0..config.repeat as u64).map(|i| config.seed + i).collect();
    let results: Vec<RunResult> = worker_pool()?.install(|| {
        seeds
            .par_iter()
            .map(|&seed| scenario::simulate(&config, seed))
            .collect::<Result<_, _>>()
    })?;
    if let Some(dir) = &args.trace_out {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        for (seed, result) in seeds.iter().zip(&results) {
            write_trace(&dir.join(format!("seed-{seed}.trace")), result)?;
        }
    }
    let (text, status) = scenario::render_fuzz(&config, &seeds, &results);
    print!("{}{text}", resilience_banner(&config));
    Ok(status)
}

fn explore_text(config: &ScenarioConfig) -> Result<(String, Status), CliError> {
    let (faulty, assignments) = scenario::explore_instances(config)?;
    let reports = scenario::explore_all(config, &faulty, &assignments)?;
    let (text, status) = scenario::render_explore(config, &faulty, &reports);
    Ok((format!("{}{text}", resilience_banner(config)), status))
}

fn explore_command(args: &ScenarioArgs) -> Result<Status, CliError> {
    let (text, status) = explore_text(&args.load()?)?;
    print!("{text}");
    Ok(status)
}

fn scenario_text(path: &Path) -> Result<String, CliError> {
    let config = ScenarioConfig::from_entries(&config::read_entries(path)?)?;
    let (text, _) = match config.command {
        Command::Run => {
            let result = scenario::simulate(&config, config.seed)?;
            let (text, status) = scenario::render_run(&config, config.seed, &result);
            (format!("{}{text}", resilience_banner(&config)), status)
        }
        Command::Explore => explore_text(&config)?,
    };
    Ok(text)
}

fn regress_command(args: &RegressArgs) -> Result<Status, CliError> {
    let mut confs: Vec<PathBuf> = std::fs::read_dir(&args.dir)
        .map_err(|e| io_error(&args.dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "conf"))
        .collect();
    confs.sort();
    if confs.is_empty() {
        return Err(CliError::Io(format!("no .conf files in {}", args.dir.display())));
    }
    let mut status = Status::Pass;
    for conf in confs {
        let name = conf.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let golden = conf.with_extension("expected");
        let text = scenario_text(&conf)?;
        if args.bless {
            std::fs::write(&golden, &text).map_err(|e| io_error(&golden, e))?;
            println!("blessed {name}");
            continue;
        }
        match std::fs::read_to_string(&golden) {
            Ok(expected) if expected == text => println!("ok {name}"),
            Ok(expected) => {
                status = Status::Fail;
                let line = expected
                    .lines()
                    .zip(text.lines())
                    .position(|(a, b)| a != b)
                    .unwrap_or_else(|| expected.lines().count().min(text.lines().count()));
                println!("FAIL {name}: output differs from line {}", line + 1);
            }
            Err(_) => {
                status = Status::Fail;
                println!("FAIL {name}: missing {}", golden.display());
            }
        }
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Run(args) => run_command(args),
        Cmd::Fuzz(args) => fuzz_command(args),
        Cmd::Explore(args) => explore_command(args),
        Cmd::Regress(args) => regress_command(args),
    };
    match result {
        Ok(status) => exit_code(status),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
