//! `qip`: solve, optimize and verify quantified integer programs, generate
//! benchmark instances, fuzz the engine against the brute-force oracle.
//!
//! Exit codes: 0 feasible / optimal / bound proved, 10 infeasible / better
//! value exists, 20 unknown, 2 usage or input error, 1 internal error or
//! fuzz disagreement.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "qip", version, about = "Expansion-based solver for quantified integer programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the existential player wins.
    Solve {
        file: PathBuf,
        /// Enumerate the game tree instead of running the engine (small instances only).
        #[arg(long)]
        oracle_bruteforce: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Find the optimal worst-case objective value by binary search.
    Optimize {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check that no strategy guarantees a value strictly better than the bound.
    VerifyBound {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        bound: i64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Write a benchmark instance to standard output or --out.
    Generate {
        #[command(subcommand)]
        family: GenerateCommand,
    },
    /// Cross-check the engine against the brute-force oracle on random instances.
    Fuzz {
        /// Seed range `A..B` (end exclusive).
        #[arg(long, value_parser = parse_range)]
        seeds: (u64, u64),
        /// Directory receiving the text of every disagreeing instance.
        #[arg(long, default_value = "fuzz-failures")]
        fail_dir: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run a benchmark family and print one CSV row per instance.
    Bench {
        #[arg(long, value_enum)]
        family: Family,
        /// Comma-separated sizes: n for qrp, |V| for mcn.
        #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
        sizes: Vec<usize>,
        /// Instances per size, seeds 0..count.
        #[arg(long, default_value_t = 5)]
        count: u64,
        #[arg(long, default_value_t = 0.05)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        omega: usize,
        #[arg(long, default_value_t = 1)]
        phi: usize,
        #[arg(long, default_value_t = 1)]
        lambda: usize,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Subcommand)]
enum GenerateCommand {
    Qrandomparity {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Clausal form instead of the linear QIP encoding.
        #[arg(long)]
        qdimacs: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Mcn {
        /// Edge list: |V| on the first line, then `u v` per line (0-based).
        #[arg(long, conflicts_with = "random")]
        graph: Option<PathBuf>,
        /// Vertex count of a random G(n, p) graph.
        #[arg(long, required_unless_present = "graph")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        omega: usize,
        #[arg(long)]
        phi: usize,
        #[arg(long)]
        lambda: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Qrp,
    Mcn,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    Builtin,
    External,
}

#[derive(Clone, Copy, ValueEnum)]
enum FirstMoveArg {
    Bounds,
    Relax,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Decimal,
    Lcd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatsFormat {
    Json,
    Csv,
    None,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "builtin")]
    oracle: OracleKind,
    /// Shell command for the external oracle; `{in}` and `{out}` are replaced by the LP and solution paths.
    #[arg(long)]
    solver_cmd: Option<String>,
    #[arg(long, value_enum, default_value = "relax")]
    first_move: FirstMoveArg,
    #[arg(long, value_enum, default_value = "decimal")]
    violation_rule: RuleArg,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, value_enum, default_value = "none")]
    stats: StatsFormat,
    /// Where machine-readable stats go; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a: u64 = a.trim().parse().map_err(|_| format!("bad range start `{a}`"))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad range end `{b}`"))?;
    if b < a {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
