use std::fs;
use std::io::{self, Cursor, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use abc_core::bpi::{correspondence_check, encode, parse_bpi, BpiProcess};
use abc_core::equivalence::{barb_predicates, compare_programs, DEFAULT_MESSAGE_CAP};
use abc_core::explorer::{build_lts, reachable, some_component_has, trace, trace_to_text, Policy};
use abc_core::*;

/// Exit status of a completed command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Positive = 0,
    Negative = 1,
    Inconclusive = 2,
}

const USAGE_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "abc", version, about = "Workbench for attribute-based communication systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunConfig {
    /// Seed for `rand` evaluation and random scheduling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Copies a replication may spawn along one path.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    repl_bound: u32,
    #[arg(long, default_value_t = 100_000, value_parser = at_least_one)]
    max_states: usize,
    #[arg(long, default_value_t = 50, value_parser = at_least_one)]
    max_depth: usize,
    /// Extra value for the predicate universe, in source syntax (repeatable).
    #[arg(long = "universe-value", value_name = "VALUE")]
    universe_values: Vec<String>,
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

impl RunConfig {
    fn step_options(&self) -> StepOptions {
        StepOptions { repl_bound: self.repl_bound, seed: self.seed, ..StepOptions::default() }
    }

    fn explore_options(&self) -> ExploreOptions {
        ExploreOptions {
            bounds: Bounds { max_states: self.max_states, max_depth: self.max_depth },
            step: self.step_options(),
            inputs: None,
        }
    }

    fn universe(&self, program: &Program) -> Result<Universe> {
        let mut u = Universe::for_program(program);
        for v in &self.universe_values {
            u.add_value(parse_value(v).map_err(|e| anyhow!("--universe-value `{v}`: {e}"))?);
        }
        Ok(u)
    }

    fn header(&self) -> String {
        format!(
            "# seed {} repl_bound {} max_states {} max_depth {}\n",
            self.seed, self.repl_bound, self.max_states, self.max_depth
        )
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model and print it in normal form.
    Parse { file: PathBuf },
    /// Run a model for a number of steps.
    Step {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Choose each transition from standard input.
        #[arg(long, conflicts_with = "choices")]
        interactive: bool,
        /// Comma-separated transition indices to take, in order.
        #[arg(long, value_delimiter = ',')]
        choices: Option<Vec<usize>>,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Build the bounded transition system of a model.
    Explore {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[command(flatten)]
        config: RunConfig,
    },
    /// List the predicates a model can immediately broadcast on.
    Barbs {
        file: PathBuf,
        /// Include barbs reachable through silent moves.
        #[arg(long)]
        weak: bool,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Decide bisimilarity of two models.
    Bisim {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, conflicts_with = "weak")]
        strong: bool,
        #[arg(long)]
        weak: bool,
        /// Largest number of environment messages offered as inputs.
        #[arg(long, default_value_t = DEFAULT_MESSAGE_CAP)]
        message_cap: usize,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Translate a broadcast pi-calculus term into an AbC model.
    Encode { file: PathBuf },
    /// Check that a broadcast pi-calculus term and its translation move in lockstep.
    CheckEncoding {
        file: PathBuf,
        #[arg(long, default_value_t = 5, value_parser = at_least_one)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search for a state where some component has an attribute value.
    Reach {
        file: PathBuf,
        #[arg(long)]
        attr: String,
        /// Value in source syntax; a bare identifier is read as a name.
        #[arg(long)]
        value: String,
        #[command(flatten)]
        config: RunConfig,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn located(path: &Path, e: Error) -> anyhow::Error {
    match e {
        Error::Parse(pe) => anyhow!("{}:{pe}", path.display()),
        other => anyhow!("{}: {other}", path.display()),
    }
}

fn load(path: &Path) -> Result<Program> {
    parse_program(&read(path)?).map_err(|e| located(path, e))
}

fn load_bpi(path: &Path) -> Result<BpiProcess> {
    parse_bpi(&read(path)?).map_err(|e| located(path, e))
}

fn attr_value(text: &str) -> Result<Value> {
    parse_value(text).or_else(|_| {
        if abc_core::syntax::lexer::is_identifier(text) {
            Ok(Value::name(text))
        } else {
            Err(anyhow!("`{text}` is not a value"))
        }
    })
}

fn run(cmd: Command, out: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Parse { file } => {
            write!(out, "{}", load(&file)?)?;
            Ok(Outcome::Positive)
        }
        Command::Step { file, steps, interactive, choices, config } => {
            let p = load(&file)?;
            let u = config.universe(&p)?;
            let opts = config.step_options();
            let mut sink = io::sink();
            let t = match (interactive, choices) {
                (true, _) => {
                    let stdin = io::stdin();
                    let mut input = stdin.lock();
                    trace(&p.main, &p.definitions, &u, steps, &opts, Policy::Interactive, &mut input, out)?
                }
                (false, Some(cs)) => {
                    let script: String = cs.iter().map(|c| format!("{c}\n")).collect();
                    let mut input = Cursor::new(script);
                    trace(&p.main, &p.definitions, &u, steps, &opts, Policy::Interactive, &mut input, &mut sink)?
                }
                (false, None) => {
                    let mut input = io::empty();
                    trace(&p.main, &p.definitions, &u, steps, &opts, Policy::Random, &mut input, &mut sink)?
                }
            };
            write!(out, "{}", trace_to_text(config.seed, &p.main, &t))?;
            Ok(Outcome::Positive)
        }
        Command::Explore { file, format, config } => {
            let p = load(&file)?;
            let u = config.universe(&p)?;
            let opts = config.explore_options();
            let lts = build_lts(&p.main, &p.definitions, &u, &opts)?;
            match format {
                Format::Text => write!(out, "{}{}", config.header(), lts.to_text())?,
                Format::Structured => {
                    let json = lts.to_json(config.seed, &opts.bounds, config.repl_bound);
                    writeln!(out, "{}", serde_json::to_string_pretty(&json)?)?;
                }
            }
            Ok(if lts.truncated.is_some() { Outcome::Inconclusive } else { Outcome::Positive })
        }
        Command::Barbs { file, weak, config } => {
            let p = load(&file)?;
            let u = config.universe(&p)?;
            let lts = build_lts(&p.main, &p.definitions, &u, &config.explore_options())?;
            write!(out, "{}", config.header())?;
            for pred in barb_predicates(&lts, lts.initial, weak) {
                writeln!(out, "barb {pred}")?;
            }
            Ok(if weak && lts.truncated.is_some() { Outcome::Inconclusive } else { Outcome::Positive })
        }
        Command::Bisim { left, right, strong: _, weak, message_cap, config } => {
            let (a, b) = (load(&left)?, load(&right)?);
            let mode = if weak { Mode::Weak } else { Mode::Strong };
            let mut opts = config.explore_options();
            if !config.universe_values.is_empty() {
                let mut u = config.universe(&a)?;
                u.merge(&config.universe(&b)?);
                opts.inputs = Some(explorer::MessageUniverse::for_programs(&[&a, &b], &u, message_cap));
            }
            let report = compare_programs(&a, &b, mode, &opts, message_cap)?;
            write!(out, "{}", config.header())?;
            writeln!(out, "# inputs: at most {message_cap} environment messages over the programs' values")?;
            let kind = match mode {
                Mode::Strong => "strong",
                Mode::Weak => "weak",
            };
            let outcome = match &report.verdict {
                Verdict::Equivalent => {
                    writeln!(out, "{kind} bisimilar")?;
                    Outcome::Positive
                }
                Verdict::Distinguished(witness) => {
                    writeln!(out, "not {kind} bisimilar")?;
                    for step in witness {
                        writeln!(out, "  {} {}", step.side, step.label)?;
                    }
                    Outcome::Negative
                }
            };
            if report.bounded {
                writeln!(out, "bounded: a transition system was truncated or hit the replication bound")?;
                return Ok(Outcome::Inconclusive);
            }
            Ok(outcome)
        }
        Command::Encode { file } => {
            write!(out, "{}", encode(&load_bpi(&file)?))?;
            Ok(Outcome::Positive)
        }
        Command::CheckEncoding { file, depth, seed } => {
            let p = load_bpi(&file)?;
            let opts = StepOptions { seed, ..StepOptions::default() };
            let r = correspondence_check(&p, depth, &opts)?;
            writeln!(out, "# seed {seed} depth {depth}")?;
            writeln!(out, "# states compared up to alpha-equivalence and equal environments")?;
            writeln!(out, "states {} steps {} truncated {}", r.states, r.steps, r.truncated)?;
            for (what, list) in [
                ("step", &r.step_mismatches),
                ("barb", &r.barb_mismatches),
                ("divergence", &r.divergence_mismatches),
                ("invariance", &r.invariance_mismatches),
            ] {
                writeln!(out, "{what} mismatches {}", list.len())?;
                if let Some(first) = list.first() {
                    writeln!(out, "{first}")?;
                }
            }
            Ok(if r.holds() { Outcome::Positive } else { Outcome::Negative })
        }
        Command::Reach { file, attr, value, config } => {
            let p = load(&file)?;
            let v = attr_value(&value)?;
            let mut u = config.universe(&p)?;
            u.add_value(v.clone());
            let opts = config.explore_options();
            let lts = build_lts(&p.main, &p.definitions, &u, &opts)?;
            write!(out, "{}", config.header())?;
            match reachable(&lts, some_component_has(&attr, &v)) {
                Some((state, path)) => {
                    writeln!(out, "reachable {attr} = {v} in {} step(s)", path.len())?;
                    writeln!(out, "start {}", lts.states[lts.initial])?;
                    for t in &path {
                        writeln!(out, "  {}\n  -> {}", t.label, lts.states[t.dst])?;
                    }
                    let replayed = explorer::replay(&lts, &path, &p.definitions, &u, &opts.step)?;
                    writeln!(out, "state {state} replay {}", if replayed { "ok" } else { "failed" })?;
                    Ok(if replayed { Outcome::Positive } else { Outcome::Inconclusive })
                }
                None if lts.truncated.is_some() => {
                    writeln!(out, "not found within bounds ({})", lts.truncated.as_deref().unwrap_or(""))?;
                    Ok(Outcome::Inconclusive)
                }
                None => {
                    writeln!(out, "unreachable: no state of {} has {attr} = {v}", lts.states.len())?;
                    Ok(Outcome::Negative)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE_ERROR } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(cli.command, &mut out);
    let _ = out.flush();
    match result {
        Ok(o) => ExitCode::from(o as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}
