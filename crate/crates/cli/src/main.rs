//! `fairslice`: solve, decide, verify, bridge and generate fair-division instances.
//!
//! Every run prints a JSON report. Exit code 0 means found or verified, 1 means
//! a proven negative answer or a failed check, 2 means an error.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairslice::gadgets::GadgetKind;
use fairslice::{Exec, SearchOptions};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "fairslice", version, about = "Exact contiguous fair division")]
struct Cli {
    /// Worker threads for exhaustive searches; 1 runs them sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Add wall-clock time to the report. Reports are otherwise reproducible byte for byte.
    #[arg(long, global = true)]
    timing: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Allocate a cake with one of the algorithms.
    Solve(SolveArgs),
    /// Decide whether an envy-free allocation meeting a constraint exists.
    Decide(DecideArgs),
    /// Turn an approximately envy-free allocation into an exact one.
    Exactify(ExactifyArgs),
    /// Check an allocation against a cake or item instance.
    Verify(VerifyArgs),
    /// Search contiguous item allocations by brute force.
    Discrete(DiscreteArgs),
    /// Move between the continuous and discrete models.
    #[command(subcommand)]
    Bridge(BridgeCommand),
    /// Build a reduction instance, optionally with its witness allocation.
    Gen(GenArgs),
    /// Run a multi-stage pipeline, keeping every intermediate file.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Alg {
    /// Moving-knife protocol, envy at most 1/3.
    Alg1,
    /// Midpoint protocol for single-interval uniform valuations, envy at most 1/4.
    Alg2,
    /// Exhaustive grid search for an ε-envy-free allocation.
    Grid,
    /// Exact envy-free allocation.
    Exact,
}

#[derive(Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub alg: Alg,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tolerance and mesh for `--alg grid`.
    #[arg(long, default_value = "1/100")]
    pub eps: String,
}

#[derive(Args)]
pub struct DecideArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// `none`, `leftmost:A`, `prefix:A,B`, `order:A,B,..`, `cut-at:X`,
    /// `leftmost-cut-at:X`, `cuts-at:X,..` or `all-cuts:X,..`; agents 1-based.
    #[arg(long, default_value = "none")]
    pub constraint: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExactifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub alloc: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub alloc: PathBuf,
    /// Accepted envy for cake allocations.
    #[arg(long, default_value = "0")]
    pub eps: String,
    /// Criteria for item allocations, e.g. `ef,eq` or `eps-ef:1/20,prop`.
    #[arg(long, default_value = "ef")]
    pub criteria: String,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum DiscreteMethod {
    /// Every composition and order.
    Brute,
    /// Embedding, grid search and rounding; binary disjoint valuations only.
    Disjoint,
}

#[derive(Args)]
pub struct DiscreteArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "ef")]
    pub criteria: String,
    #[arg(long, value_enum, default_value = "brute")]
    pub method: DiscreteMethod,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum BridgeCommand {
    /// Cake with disjoint value-blocks to items.
    C2d {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Binary disjoint items to a cake.
    D2c {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Round an ε-envy-free allocation of the embedded cake back to items.
    Round {
        /// The item instance.
        #[arg(long = "in")]
        input: PathBuf,
        /// Allocation of the cake produced by `bridge d2c`.
        #[arg(long)]
        alloc: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long)]
    pub kind: GadgetKind,
    /// Formula (DIMACS or JSON) or numbers (JSON array).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Satisfying assignment or 3-partition (1-based triples) for the witness.
    #[arg(long)]
    pub witness: Option<PathBuf>,
    /// Where to write the witness allocation.
    #[arg(long)]
    pub witness_out: Option<PathBuf>,
    /// Where to write the layout certificate.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
    /// Multiply the numbers by n first (items-eq3p needs every x_i > n).
    #[arg(long)]
    pub scale: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PipelineName {
    /// Items to cake, grid search, chain rounding.
    DisjointEf,
    /// Precision-bound grid search, then exactification.
    Exactify,
    /// Cake to items, brute force, back to the cake.
    C2dRoundtrip,
}

#[derive(Args)]
pub struct PipelineArgs {
    #[arg(value_enum)]
    pub name: PipelineName,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value = "1/4")]
    pub eps: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Found,
    None,
    Pass,
    Fail,
    Generated,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Found => "found",
            Status::None => "none",
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Generated => "generated",
        }
    }

    fn exit(self) -> u8 {
        match self {
            Status::Found | Status::Pass | Status::Generated => 0,
            Status::None | Status::Fail => 1,
        }
    }
}

/// Report body of a finished command.
pub struct Outcome {
    pub status: Status,
    pub fields: Map<String, Value>,
}

impl Outcome {
    pub fn new(status: Status) -> Self {
        Outcome { status, fields: Map::new() }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.fields.insert(key.to_string(), value);
        self
    }
}

fn error_code(e: &anyhow::Error) -> &'static str {
    if let Some(f) = e.downcast_ref::<fairslice::Error>() {
        f.code()
    } else if e.downcast_ref::<std::io::Error>().is_some() {
        "io"
    } else {
        "input"
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let exec = match cli.threads {
        Some(0) => anyhow::bail!("--threads must be positive"),
        Some(1) => Exec::Sequential,
        _ => Exec::Parallel,
    };
    #[cfg(feature = "parallel")]
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let opts = SearchOptions { exec, ..SearchOptions::from_env() };
    match &cli.command {
        Command::Solve(a) => commands::solve(a, &opts),
        Command::Decide(a) => commands::decide(a, &opts),
        Command::Exactify(a) => commands::exactify(a),
        Command::Verify(a) => commands::verify(a),
        Command::Discrete(a) => commands::discrete(a, &opts),
        Command::Bridge(b) => commands::bridge(b),
        Command::Gen(a) => commands::gen(a),
        Command::Pipeline(a) => commands::pipeline(a, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let outcome = run(&cli);
    let (mut report, code) = match outcome {
        Ok(o) => {
            let mut r = o.fields;
            r.insert("status".into(), json!(o.status.label()));
            (r, o.status.exit())
        }
        Err(e) => {
            let mut r = Map::new();
            r.insert("status".into(), json!("error"));
            r.insert("error".into(), json!({"code": error_code(&e), "message": format!("{e:#}")}));
            eprintln!("error: {e:#}");
            (r, 2)
        }
    };
    report.insert("command".into(), json!(echo.join(" ")));
    if cli.timing {
        report.insert("wall_time_ms".into(), json!(start.elapsed().as_millis() as u64));
    }
    let text = serde_json::to_string_pretty(&Value::Object(report)).expect("report serializes");
    match &cli.report {
        Some(path) => {
            if let Err(e) = io::write(path, &text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        }
        None => println!("{text}"),
    }
    ExitCode::from(code)
}
