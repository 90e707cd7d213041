use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use qip_core::cegar::{solve_qip, FirstMove, SolveOptions, SolveOutcome};
use qip_core::fuzz::{cross_check, random_qip, FuzzConfig};
use qip_core::generators::{
    emit_qdimacs_qrandomparity, gen_mcn, gen_qrandomparity, qrandomparity_qip_text, Graph, McnBudgets,
};
use qip_core::ip_oracle::{ExternalSolver, IpOracle};
use qip_core::optimize::{optimize, verify_bound, OptResult, VerifyOutcome};
use qip_core::oracle_bruteforce::{minimax_value, MinimaxValue};
use qip_core::parser::{parse_qip, serialize_qip};
use qip_core::stats::SolveStats;
use qip_core::wins::ViolationRule;
use qip_core::{Assignment, QipInstance};

use crate::{Command, Family, FirstMoveArg, GenerateCommand, OracleKind, RuleArg, SolverArgs, StatsFormat};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INFEASIBLE: u8 = 10;
pub const EXIT_UNKNOWN: u8 = 20;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INTERNAL: u8 = 1;

pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn internal(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_INTERNAL,
        message: message.into(),
    }
}

type CliResult = Result<u8, CliError>;

fn load(path: &Path) -> Result<QipInstance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    parse_qip(&text).map_err(|e| usage(format!("{}:{}: {}", path.display(), e.span, e.message)))
}

fn options(args: &SolverArgs) -> Result<SolveOptions, CliError> {
    let oracle = match (args.oracle, &args.solver_cmd) {
        (OracleKind::Builtin, _) => IpOracle::Builtin,
        (OracleKind::External, Some(cmd)) => IpOracle::External(ExternalSolver::new(cmd.clone())),
        (OracleKind::External, None) => return Err(usage("--oracle external needs --solver-cmd")),
    };
    let time_limit = match args.time_limit {
        Some(t) if !(t.is_finite() && t >= 0.0) => return Err(usage(format!("--time-limit must be >= 0, got {t}"))),
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    Ok(SolveOptions {
        first_move: match args.first_move {
            FirstMoveArg::Bounds => FirstMove::Bounds,
            FirstMoveArg::Relax => FirstMove::Relax,
        },
        violation_rule: match args.violation_rule {
            RuleArg::Decimal => ViolationRule::Decimal,
            RuleArg::Lcd => ViolationRule::Lcd,
        },
        oracle,
        time_limit,
        max_nodes: None,
    })
}

fn emit_stats(args: &SolverArgs, stats: &SolveStats) -> Result<(), CliError> {
    let text = match args.stats {
        StatsFormat::None => return Ok(()),
        StatsFormat::Json => serde_json::to_string(stats).map_err(|e| internal(e.to_string()))? + "\n",
        StatsFormat::Csv => format!("{}\n{}\n", SolveStats::CSV_HEADER, stats.csv_row()),
    };
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn show_move(inst: &QipInstance, mv: &Assignment) -> String {
    mv.display_with(|v| inst.name(v))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Solve {
            file,
            oracle_bruteforce,
            solver,
        } => {
            let inst = load(&file)?;
            if oracle_bruteforce {
                solve_bruteforce(&inst, &solver)
            } else {
                solve(&inst, &solver)
            }
        }
        Command::Optimize { file, solver } => run_optimize(&load(&file)?, &solver),
        Command::VerifyBound { file, bound, solver } => run_verify(&load(&file)?, bound, &solver),
        Command::Generate { family } => generate(family),
        Command::Fuzz {
            seeds,
            fail_dir,
            solver,
        } => fuzz(seeds, &fail_dir, &solver),
        Command::Bench {
            family,
            sizes,
            count,
            density,
            omega,
            phi,
            lambda,
            jobs,
            solver,
        } => {
            let budgets = McnBudgets { omega, phi, lambda };
            bench(family, &sizes, count, density, budgets, jobs, &solver)
        }
    }
}

fn solve(inst: &QipInstance, args: &SolverArgs) -> CliResult {
    let report = solve_qip(inst, &options(args)?);
    let code = match &report.outcome {
        SolveOutcome::Feasible { first_move: Some(mv) } => {
            println!("feasible; first move {}", show_move(inst, mv));
            EXIT_OK
        }
        SolveOutcome::Feasible { first_move: None } => {
            println!("feasible");
            EXIT_OK
        }
        SolveOutcome::Infeasible => {
            println!("infeasible");
            EXIT_INFEASIBLE
        }
        SolveOutcome::Unknown(r) => {
            println!("unknown ({r})");
            EXIT_UNKNOWN
        }
    };
    emit_stats(args, &report.stats)?;
    Ok(code)
}

fn solve_bruteforce(inst: &QipInstance, args: &SolverArgs) -> CliResult {
    let start = Instant::now();
    let mut stats = SolveStats::default();
    let code = match minimax_value(&inst.with_objective(None)) {
        Err(refused) => {
            println!("unknown ({refused})");
            stats.outcome = "unknown".into();
            EXIT_UNKNOWN
        }
        Ok(r) if r.value == MinimaxValue::Infeasible => {
            println!("infeasible");
            stats.outcome = "infeasible".into();
            EXIT_INFEASIBLE
        }
        Ok(r) => {
            match (&r.first_move, r.value) {
                (_, MinimaxValue::Vacuous) => println!("feasible (some universal block has no legal move)"),
                (Some(mv), _) => println!("feasible; first move {}", show_move(inst, mv)),
                (None, _) => println!("feasible"),
            }
            stats.outcome = "feasible".into();
            EXIT_OK
        }
    };
    stats.wall_ms = start.elapsed().as_millis() as u64;
    emit_stats(args, &stats)?;
    Ok(code)
}

fn run_optimize(inst: &QipInstance, args: &SolverArgs) -> CliResult {
    let report = optimize(inst, &options(args)?).map_err(|e| usage(e.to_string()))?;
    let code = match &report.result {
        OptResult::Optimal { value, first_move } => {
            println!("optimal value {value}; first move {}", show_move(inst, first_move));
            EXIT_OK
        }
        OptResult::Infeasible => {
            println!("infeasible");
            EXIT_INFEASIBLE
        }
        OptResult::Unknown(r) => {
            println!("unknown ({r})");
            EXIT_UNKNOWN
        }
    };
    println!("decision solves: {} (bound {})", report.calls.len(), report.call_bound());
    emit_stats(args, &report.stats)?;
    Ok(code)
}

fn run_verify(inst: &QipInstance, bound: i64, args: &SolverArgs) -> CliResult {
    let start = Instant::now();
    let (outcome, mut stats) = verify_bound(inst, bound, &options(args)?).map_err(|e| usage(e.to_string()))?;
    let code = match outcome {
        VerifyOutcome::ProvedOptimalAt(z) => {
            println!("no strategy guarantees better than {z}");
            stats.outcome = "optimal".into();
            EXIT_OK
        }
        VerifyOutcome::BetterExists => {
            println!("a strictly better value than {bound} can be guaranteed");
            stats.outcome = "infeasible".into();
            EXIT_INFEASIBLE
        }
        VerifyOutcome::Unknown(r) => {
            println!("unknown ({r})");
            stats.outcome = "unknown".into();
            EXIT_UNKNOWN
        }
    };
    stats.wall_ms = start.elapsed().as_millis() as u64;
    emit_stats(args, &stats)?;
    Ok(code)
}

fn generate(family: GenerateCommand) -> CliResult {
    match family {
        GenerateCommand::Qrandomparity { n, seed, qdimacs, out } => {
            let text = if qdimacs {
                emit_qdimacs_qrandomparity(n, seed)
            } else {
                qrandomparity_qip_text(n, seed)
            }
            .map_err(|e| usage(e.to_string()))?;
            write_or_print(out.as_deref(), &text)?;
        }
        GenerateCommand::Mcn {
            graph,
            random,
            density,
            seed,
            omega,
            phi,
            lambda,
            out,
        } => {
            let (g, origin) = match (graph, random) {
                (Some(path), _) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                    let g = Graph::parse_edge_list(&text).map_err(|e| usage(e.to_string()))?;
                    (g, format!("graph {}", path.display()))
                }
                (None, Some(n)) => {
                    if !(0.0..=1.0).contains(&density) {
                        return Err(usage(format!("--density must be in [0, 1], got {density}")));
                    }
                    (Graph::random(n, density, seed), format!("G({n}, {density}) seed={seed}"))
                }
                (None, None) => return Err(usage("give --graph FILE or --random N")),
            };
            let inst = gen_mcn(&g, McnBudgets { omega, phi, lambda }).map_err(|e| usage(e.to_string()))?;
            let text = format!(
                "# MCN {origin} omega={omega} phi={phi} lambda={lambda}\n{}",
                serialize_qip(&inst)
            );
            write_or_print(out.as_deref(), &text)?;
        }
    }
    Ok(EXIT_OK)
}

fn fuzz((from, to): (u64, u64), fail_dir: &Path, args: &SolverArgs) -> CliResult {
    let opts = options(args)?;
    let cfg = FuzzConfig::default();
    let (mut feasible, mut refused, mut failures) = (0u64, 0u64, 0u64);
    for seed in from..to {
        let inst = random_qip(seed, &cfg);
        match cross_check(&inst, &opts) {
            Err(_) => refused += 1,
            Ok(c) => {
                feasible += u64::from(c.feasible == Some(true));
                if !c.agrees() {
                    failures += 1;
                    fs::create_dir_all(fail_dir)
                        .map_err(|e| internal(format!("cannot create {}: {e}", fail_dir.display())))?;
                    let path = fail_dir.join(format!("seed_{seed}.qip"));
                    let mut text = String::new();
                    for m in &c.mismatches {
                        text.push_str(&format!("# {m}\n"));
                    }
                    text.push_str(&serialize_qip(&inst));
                    fs::write(&path, text).map_err(|e| internal(format!("cannot write {}: {e}", path.display())))?;
                    eprintln!("seed {seed}: {}", c.mismatches.join("; "));
                }
            }
        }
    }
    println!(
        "{} instances, {feasible} feasible, {refused} too large, {failures} disagreements",
        to - from
    );
    Ok(if failures == 0 { EXIT_OK } else { EXIT_INTERNAL })
}

struct BenchJob {
    params: String,
    seed: u64,
    inst: QipInstance,
    optimize: bool,
}

fn run_job(job: &BenchJob, opts: &SolveOptions) -> String {
    let stats = if job.optimize {
        match optimize(&job.inst, opts) {
            Ok(r) => r.stats,
            Err(e) => SolveStats {
                outcome: format!("error: {e}"),
                ..SolveStats::default()
            },
        }
    } else {
        solve_qip(&job.inst, opts).stats
    };
    format!(
        "{},{},{},{},{},{}",
        job.params, job.seed, stats.outcome, stats.wall_ms, stats.ip_calls, stats.refinements
    )
}

fn bench(
    family: Family,
    sizes: &[usize],
    count: u64,
    density: f64,
    budgets: McnBudgets,
    jobs: usize,
    args: &SolverArgs,
) -> CliResult {
    let opts = options(args)?;
    let mut work = Vec::new();
    for &size in sizes {
        for seed in 0..count {
            let job = match family {
                Family::Qrp => BenchJob {
                    params: format!("qrp,n={size}"),
                    seed,
                    inst: gen_qrandomparity(size, seed).map_err(|e| usage(e.to_string()))?,
                    optimize: false,
                },
                Family::Mcn => {
                    let b = McnBudgets {
                        omega: budgets.omega.min(size),
                        phi: budgets.phi.min(size),
                        lambda: budgets.lambda.min(size),
                    };
                    BenchJob {
                        params: format!("mcn,V={size} p={density} O={} F={} L={}", b.omega, b.phi, b.lambda),
                        seed,
                        inst: gen_mcn(&Graph::random(size, density, seed), b).map_err(|e| usage(e.to_string()))?,
                        optimize: true,
                    }
                }
            };
            work.push(job);
        }
    }

    let rows: Vec<Mutex<Option<String>>> = work.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = work.get(i) else { break };
                let row = run_job(job, &opts);
                *rows[i].lock().expect("no worker panics while holding the lock") = Some(row);
            });
        }
    });

    let mut text = String::from("family,params,seed,outcome,wall_ms,ip_calls,refinements\n");
    for row in rows {
        let row = row.into_inner().map_err(|_| internal("a bench worker panicked"))?;
        text.push_str(&row.ok_or_else(|| internal("a bench instance was skipped"))?);
        text.push('\n');
    }
    write_or_print(args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qip_core::oracle_bruteforce::minimax_feasible;

    #[test]
    fn external_oracle_needs_a_command() {
        let args = SolverArgs {
            oracle: OracleKind::External,
            solver_cmd: None,
            first_move: FirstMoveArg::Relax,
            violation_rule: RuleArg::Decimal,
            time_limit: None,
            stats: StatsFormat::None,
            out: None,
        };
        assert_eq!(options(&args).err().map(|e| e.code), Some(EXIT_USAGE));
    }

    #[test]
    fn minimax_agrees_on_a_random_instance() {
        let inst = random_qip(3, &FuzzConfig::default());
        let r = solve_qip(&inst, &SolveOptions::default());
        let feasible = matches!(r.outcome, SolveOutcome::Feasible { .. });
        assert_eq!(minimax_feasible(&inst).unwrap(), feasible);
    }
}
