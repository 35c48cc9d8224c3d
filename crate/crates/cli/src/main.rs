//! Batch experiment runner: loads a JSON config, dispatches to the library,
//! and writes a result JSON plus a plot-ready CSV trace.
//!
//! Exit codes: 0 success (non-convergence is flagged in the result, not
//! fatal), 2 invalid config or parameters, 3 internal invariant violation or
//! a failed property suite.

mod config;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::run::CommandKind;

#[derive(Parser)]
#[command(
    name = "curverad",
    version,
    about = "Growth statistics of matrix and curve cocycles over shifts of finite type"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Drift of random orbits sampled from a Markov chain
    Lyapunov(RunArgs),
    /// Close a sampled orbit into a nearby periodic word
    PeriodicApprox(RunArgs),
    /// Two-sided bracket for the maximal growth rate
    Jsr(RunArgs),
    /// Best periodic orbit up to a cycle length bound
    OptimalOrbit(RunArgs),
    /// Cylinder-sum pressure on a q grid
    Pressure(RunArgs),
    /// Pressure ratios and Gibbs concentration across a q grid
    ZeroTemp(RunArgs),
    /// Cross-checks and invariant suites for the configured target
    OracleCheck(RunArgs),
}

impl Command {
    fn parts(self) -> (CommandKind, RunArgs) {
        match self {
            Command::Lyapunov(a) => (CommandKind::Lyapunov, a),
            Command::PeriodicApprox(a) => (CommandKind::PeriodicApprox, a),
            Command::Jsr(a) => (CommandKind::Jsr, a),
            Command::OptimalOrbit(a) => (CommandKind::OptimalOrbit, a),
            Command::Pressure(a) => (CommandKind::Pressure, a),
            Command::ZeroTemp(a) => (CommandKind::ZeroTemp, a),
            Command::OracleCheck(a) => (CommandKind::OracleCheck, a),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config
    #[arg(long)]
    seed: Option<u64>,
    /// Worker cap for parallel enumeration; overrides the config
    #[arg(long)]
    threads: Option<usize>,
    /// Directory for result files (default: current directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let (kind, args) = Cli::parse().command.parts();
    std::process::exit(run_command(kind, args));
}

fn run_command(kind: CommandKind, args: RunArgs) -> i32 {
    let loaded = match config::load(&args.config, args.seed, args.threads) {
        Ok(l) => l,
        Err(message) => {
            eprintln!("{message}");
            return 2;
        }
    };

    if let Some(t) = loaded.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("config error: cannot set up a {t}-thread pool: {e}");
            return 2;
        }
    }

    let start = Instant::now();
    let outcome = match run::execute(kind, &loaded) {
        Ok(o) => o,
        Err(curverad::Error::Input(m)) => {
            eprintln!("{}", config::describe_input_error(&args.config, &loaded.raw, &m));
            return 2;
        }
        Err(curverad::Error::Invariant(m)) => {
            eprintln!("invariant violation: {m}");
            return 3;
        }
    };
    let wall = start.elapsed().as_secs_f64();

    let doc = json!({
        "command": kind.name(),
        "seed": loaded.seed,
        "threads": loaded.threads,
        "wall_time_seconds": wall,
        "config": loaded.echo,
        "result": outcome.result,
    });

    let base = args.out.unwrap_or_else(|| PathBuf::from("."));
    let json_path = resolve(&base, loaded.output.json.as_deref(), &format!("{}.json", kind.name()));
    let mut rendered = serde_json::to_string_pretty(&doc).expect("result serializes");
    rendered.push('\n');
    let mut written = vec![json_path.display().to_string()];
    if let Err(e) = write_output(&json_path, &rendered) {
        eprintln!("config error: cannot write {}: {e}", json_path.display());
        return 2;
    }
    if let Some(csv) = &outcome.csv {
        let csv_path =
            resolve(&base, loaded.output.csv.as_deref(), &format!("{}.csv", kind.name()));
        if let Err(e) = write_output(&csv_path, csv) {
            eprintln!("config error: cannot write {}: {e}", csv_path.display());
            return 2;
        }
        written.push(csv_path.display().to_string());
    }

    println!("{}", outcome.summary);
    println!("wrote {} ({wall:.2} s)", written.join(" and "));

    if let Some(failure) = outcome.suite_failure {
        eprintln!("invariant violation: {failure}");
        return 3;
    }
    if outcome.flagged {
        eprintln!("note: some runs did not converge; details are in the result JSON");
    }
    0
}

fn resolve(base: &Path, configured: Option<&str>, default_name: &str) -> PathBuf {
    let p = PathBuf::from(configured.unwrap_or(default_name));
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn write_output(path: &Path, content: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, content)
}
