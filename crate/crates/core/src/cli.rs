//! Command-line front end. Exit codes: 0 success, 1 failed verification,
//! 2 usage error, 3 resource bound exceeded.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chain::{stationary_oracle, Content, StationaryVector, SystemParams, DEFAULT_MAX_STATES};
use crate::diagrams::stationary_from_diagrams;
use crate::error::Error;
use crate::montecarlo::{run_replicas, Horizon};
use crate::numeric::{parse_rational, parse_rational_list, Rational};
use crate::observables::{current_oracle, current_single_species, density, density_oracle, CurrentSpec, Method, ObservableReport};
use crate::verify::{run_suite, Bounds, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "pushtasep", version, about = "Exact and simulated stationary behaviour of the multispecies t-PushTASEP")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact stationary distribution.
    Stationary {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum, default_value_t = StationaryMethod::Both)]
        method: StationaryMethod,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a verification suite: qkz, lemma72, symmetry, projection, bottom-rows or denominator.
    Verify {
        suite: Suite,
        #[arg(long)]
        max_n: Option<usize>,
        /// Restrict to one content, as multiplicities `m0,m1,...,ms`.
        #[arg(long, conflicts_with = "lambda")]
        content: Option<String>,
        /// Restrict to the content of this word, such as `4,3,2,0`.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Densities and currents, exactly.
    Observables {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum)]
        which: Which,
        /// Species to report; all species when omitted.
        #[arg(long)]
        species: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Continuous-time simulation with exact comparisons.
    Simulate {
        #[command(flatten)]
        system: SystemArgs,
        /// Number of hops to simulate; 100000 when neither horizon is given
        #[arg(long, conflicts_with = "time")]
        events: Option<u64>,
        /// Continuous-time horizon
        #[arg(long)]
        time: Option<f64>,
        /// RNG seed; 0 when omitted
        #[arg(long)]
        seed: Option<u64>,
        /// Independent runs with seeds derived from the base seed
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct SystemArgs {
    /// JSON job file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Multiplicities `m0,m1,...,ms`.
    #[arg(long, conflicts_with = "lambda")]
    content: Option<String>,
    /// Entries of a word with the desired content, such as `2,1,0`.
    #[arg(long)]
    lambda: Option<String>,
    /// Site parameters `p/q,p/q,...`; all ones when omitted.
    #[arg(long)]
    x: Option<String>,
    /// Push parameter; 0 when omitted.
    #[arg(long)]
    t: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum StationaryMethod {
    Oracle,
    Diagrams,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Which {
    Density,
    Current,
    CurrentOracle,
}

/// Job description accepted by `--config`.
#[derive(Deserialize, Serialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub content: Option<Vec<usize>>,
    pub lambda: Option<Vec<usize>>,
    pub x: Option<Vec<String>>,
    pub t: Option<String>,
    pub seed: Option<u64>,
    pub events: Option<u64>,
    pub time: Option<f64>,
}

enum Failure {
    Usage(String),
    Resource(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::StateSpaceTooLarge { .. } => Failure::Resource(e.to_string()),
            Error::Internal(_) | Error::Singular | Error::Inexact => Failure::Other(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Resolved {
    content: Content,
    params: SystemParams,
    job: JobConfig,
}

fn parse_list(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| Failure::Usage(format!("bad integer list {s:?}"))))
        .collect()
}

fn resolve(args: &SystemArgs) -> CliResult<Resolved> {
    let mut job: JobConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("bad config file: {e}")))?
        }
        None => JobConfig::default(),
    };
    if let Some(c) = &args.content {
        job.content = Some(parse_list(c)?);
        job.lambda = None;
    }
    if let Some(l) = &args.lambda {
        job.lambda = Some(parse_list(l)?);
        job.content = None;
    }
    if let Some(x) = &args.x {
        job.x = Some(parse_rational_list(x)?.iter().map(Rational::to_string).collect());
    }
    if let Some(t) = &args.t {
        job.t = Some(parse_rational(t)?.to_string());
    }
    let content = match (&job.content, &job.lambda) {
        (Some(m), _) => Content::new(m.clone())?,
        (None, Some(l)) => Content::from_lambda(l)?,
        (None, None) => return Err(Failure::Usage("give --content or --lambda".into())),
    };
    let n = content.n();
    let x = match &job.x {
        Some(xs) => xs.iter().map(|v| parse_rational(v)).collect::<crate::error::Result<Vec<_>>>()?,
        None => vec![Rational::from_integer(1.into()); n],
    };
    let t = match &job.t {
        Some(t) => parse_rational(t)?,
        None => Rational::from_integer(0.into()),
    };
    let params = SystemParams::new(x, t)?;
    params.check_len(&content)?;
    job.content = Some(content.multiplicities().to_vec());
    job.lambda = None;
    job.x = Some(params.x.iter().map(Rational::to_string).collect());
    job.t = Some(params.t.to_string());
    Ok(Resolved { content, params, job })
}

fn envelope(command: &str, config: serde_json::Value, result: serde_json::Value) -> String {
    let doc = json!({
        "tool": "pushtasep",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "result": result,
    });
    serde_json::to_string_pretty(&doc).expect("json") + "\n"
}

fn csv_header(command: &str, config: &serde_json::Value) -> String {
    format!("# pushtasep {} {command}\n# config {}\n", env!("CARGO_PKG_VERSION"), config)
}

fn emit(output: &OutputArgs, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_states(content: &Content, max_states: usize) -> CliResult<()> {
    let states = content.num_states();
    if states > max_states {
        return Err(Error::StateSpaceTooLarge { states, limit: max_states }.into());
    }
    Ok(())
}

fn cmd_stationary(system: &SystemArgs, method: StationaryMethod, max_states: usize, output: &OutputArgs) -> CliResult<bool> {
    let r = resolve(system)?;
    check_states(&r.content, max_states)?;
    let oracle = || stationary_oracle(&r.content, &r.params, max_states);
    let diagrams = || stationary_from_diagrams(&r.content, &r.params);
    let (pi, verdict): (StationaryVector, Option<bool>) = match method {
        StationaryMethod::Oracle => (oracle()?, None),
        StationaryMethod::Diagrams => (diagrams()?, None),
        StationaryMethod::Both => {
            let a = oracle()?;
            let b = diagrams()?;
            let eq = a == b;
            (b, Some(eq))
        }
    };
    let config = json!({"job": r.job, "method": method.to_possible_value().expect("value").get_name().to_string()});
    let verdict_text = verdict.map(|v| if v { "EQUAL" } else { "DIFFERENT" });
    let text = match output.format {
        Format::Json => {
            let mut result = pi.to_json();
            if let Some(v) = verdict_text {
                result["verdict"] = json!(v);
            }
            envelope("stationary", config, result)
        }
        Format::Csv => {
            let mut text = csv_header("stationary", &config);
            if let Some(v) = verdict_text {
                text.push_str(&format!("# verdict {v}\n"));
            }
            text + &pi.to_csv()
        }
    };
    emit(output, &text)?;
    Ok(verdict.unwrap_or(true))
}

fn cmd_verify(suite: Suite, max_n: Option<usize>, content: Option<&str>, lambda: Option<&str>, seed: u64, output: &OutputArgs) -> CliResult<bool> {
    let content = match (content, lambda) {
        (Some(c), _) => Some(Content::new(parse_list(c)?)?),
        (None, Some(l)) => Some(Content::from_lambda(&parse_list(l)?)?),
        (None, None) => None,
    };
    let bounds = Bounds { max_n, content, seed };
    let report = run_suite(suite, &bounds)?;
    let config = json!({"suite": suite.name(), "max_n": max_n.unwrap_or(suite.default_max_n()), "content": bounds.content, "seed": seed});
    let text = match output.format {
        Format::Json => envelope("verify", config, serde_json::to_value(&report).expect("json")),
        Format::Csv => {
            let mut text = csv_header("verify", &config);
            text.push_str("instance,pass,detail\n");
            for i in &report.instances {
                text.push_str(&format!("\"{}\",{},\"{}\"\n", i.instance, i.pass, i.detail.as_deref().unwrap_or("")));
            }
            text
        }
    };
    emit(output, &text)?;
    Ok(report.pass)
}

fn species_list(content: &Content, species: Option<usize>) -> CliResult<Vec<usize>> {
    match species {
        Some(r) if r == 0 || r > content.s() => Err(Failure::Usage(format!("species {r} outside 1..={}", content.s()))),
        Some(r) => Ok(vec![r]),
        None => Ok((1..=content.s()).collect()),
    }
}

fn report(name: &str, value: &Rational, method: Method, metadata: serde_json::Value) -> ObservableReport {
    ObservableReport {
        name: name.into(),
        exact_value: value.to_string(),
        method,
        metadata,
    }
}

fn cmd_observables(system: &SystemArgs, which: Which, species: Option<usize>, max_states: usize, output: &OutputArgs) -> CliResult<bool> {
    let r = resolve(system)?;
    let (content, params) = (&r.content, &r.params);
    let n = content.n();
    let list = species_list(content, species)?;
    let mut reports = Vec::new();
    let mut agree = true;
    match which {
        Which::Density => {
            let with_oracle = content.num_states() <= max_states;
            for &s in &list {
                let f = density(content, s, params)?;
                reports.push(report("density", &f, Method::Formula, json!({"species": s, "site": 1})));
                if with_oracle {
                    let o = density_oracle(content, s, params)?;
                    agree &= o == f;
                    reports.push(report("density", &o, Method::Oracle, json!({"species": s, "site": 1})));
                }
            }
        }
        Which::Current => {
            if content.s() != 1 {
                return Err(Failure::Usage("the closed-form current covers a single species; use current-oracle".into()));
            }
            let f = current_single_species(content.m(0), content.m(1), params)?;
            reports.push(report("current", &f, Method::Formula, json!({"species": 1, "edge": [n, 1]})));
            check_states(content, max_states)?;
            let o = current_oracle(content, CurrentSpec::across_last_edge(1, n), params)?;
            agree &= o == f;
            reports.push(report("current", &o, Method::Oracle, json!({"species": 1, "edge": [n, 1]})));
        }
        Which::CurrentOracle => {
            check_states(content, max_states)?;
            for &s in &list {
                let o = current_oracle(content, CurrentSpec::across_last_edge(s, n), params)?;
                reports.push(report("current", &o, Method::Oracle, json!({"species": s, "edge": [n, 1]})));
            }
        }
    }
    let config = json!({"job": r.job, "which": which.to_possible_value().expect("value").get_name().to_string(), "species": species});
    let text = match output.format {
        Format::Json => envelope("observables", config, json!({"reports": reports, "formula_matches_oracle": agree})),
        Format::Csv => {
            let mut text = csv_header("observables", &config);
            text.push_str("observable,species,method,value\n");
            for rep in &reports {
                let method = serde_json::to_value(rep.method).expect("json");
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    rep.name,
                    rep.metadata["species"],
                    method.as_str().unwrap_or(""),
                    rep.exact_value
                ));
            }
            text
        }
    };
    emit(output, &text)?;
    Ok(agree)
}

fn cmd_simulate(
    system: &SystemArgs,
    events: Option<u64>,
    time: Option<f64>,
    seed: Option<u64>,
    replicas: usize,
    output: &OutputArgs,
) -> CliResult<bool> {
    let mut r = resolve(system)?;
    if replicas == 0 {
        return Err(Failure::Usage("need at least one replica".into()));
    }
    let events = events.or(if time.is_some() { None } else { r.job.events });
    let time = time.or(if events.is_some() { None } else { r.job.time });
    let horizon = match (events, time) {
        (Some(e), _) => Horizon::Events(e),
        (None, Some(t)) => Horizon::Time(t),
        (None, None) => Horizon::Events(100_000),
    };
    let seed = seed.or(r.job.seed).unwrap_or(0);
    r.job.seed = Some(seed);
    (r.job.events, r.job.time) = match horizon {
        Horizon::Events(e) => (Some(e), None),
        Horizon::Time(t) => (None, Some(t)),
    };
    let reports = run_replicas(&r.content, &r.params, horizon, seed, replicas)?;
    if output.format == Format::Csv {
        return Err(Failure::Usage("simulation reports are JSON only".into()));
    }
    let config = json!({"job": r.job, "replicas": replicas});
    let result = if replicas == 1 {
        serde_json::to_value(&reports[0]).expect("json")
    } else {
        serde_json::to_value(&reports).expect("json")
    };
    emit(output, &envelope("simulate", config, result))?;
    Ok(true)
}

fn dispatch(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Stationary {
            system,
            method,
            max_states,
            output,
        } => cmd_stationary(&system, method, max_states, &output),
        Command::Verify {
            suite,
            max_n,
            content,
            lambda,
            seed,
            output,
        } => cmd_verify(suite, max_n, content.as_deref(), lambda.as_deref(), seed, &output),
        Command::Observables {
            system,
            which,
            species,
            max_states,
            output,
        } => cmd_observables(&system, which, species, max_states, &output),
        Command::Simulate {
            system,
            events,
            time,
            seed,
            replicas,
            output,
        } => cmd_simulate(&system, events, time, seed, replicas, &output),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("verification failed");
            EXIT_FAILED
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Resource(m)) => {
            eprintln!("error: {m}");
            EXIT_RESOURCE
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            EXIT_FAILED
        }
    }
}
