//! Seeded random instances and the cross-check of the engine against the
//! brute-force oracle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cegar::{solve_qip, SolveOptions, SolveOutcome};
use crate::model::{Assignment, LinearConstraint, QipBuilder, QipInstance, Quantifier, Relation, Sense, VarId};
use crate::optimize::{optimize, verify_bound, OptResult, VerifyOutcome};
use crate::oracle_bruteforce::{minimax_feasible, minimax_value, MinimaxValue, Refused};

#[derive(Debug, Clone, Copy)]
pub struct FuzzConfig {
    pub max_vars: usize,
    /// Largest number of values in a domain.
    pub max_domain: i64,
    pub max_blocks: usize,
    pub max_rows: usize,
    /// Probability of a one-row uncertainty set.
    pub univ_prob: f64,
    pub objective_prob: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            max_vars: 9,
            max_domain: 3,
            max_blocks: 4,
            max_rows: 5,
            univ_prob: 0.5,
            objective_prob: 0.7,
        }
    }
}

fn random_row(rng: &mut ChaCha8Rng, vars: &[(VarId, i64, i64)], point: &[i64], max_len: usize) -> Option<(Vec<(i64, VarId)>, i64)> {
    if vars.is_empty() {
        return None;
    }
    let len = rng.random_range(1..=max_len.min(vars.len()));
    let mut picked: Vec<usize> = (0..vars.len()).collect();
    picked.shuffle(rng);
    picked.truncate(len);
    picked.sort_unstable();
    let mut terms = Vec::new();
    let mut activity = 0;
    for i in picked {
        let mut c = rng.random_range(-3..=3);
        if c == 0 {
            c = 1;
        }
        terms.push((c, vars[i].0));
        activity += c * point[i];
    }
    Some((terms, activity))
}

/// A random instance. Universal rows, when present, are satisfied by some
/// point, so the uncertainty set is never empty.
pub fn random_qip(seed: u64, cfg: &FuzzConfig) -> QipInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=cfg.max_vars);
    let k = rng.random_range(1..=cfg.max_blocks.min(n));
    // Block boundaries: k - 1 distinct cut points in 1..n.
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(&mut rng);
    cuts.truncate(k - 1);
    cuts.sort_unstable();
    let first = if rng.random_bool(0.75) { Quantifier::Exists } else { Quantifier::Forall };

    let mut b = QipBuilder::new();
    let mut vars = Vec::new();
    let mut q = first;
    for i in 0..n {
        if cuts.contains(&i) {
            q = q.dual();
        }
        let lower = rng.random_range(-1..=1);
        let upper = lower + rng.random_range(0..cfg.max_domain);
        let id = b.var(format!("v{}", i + 1), q, lower, upper);
        vars.push((id, lower, upper, q));
    }
    let point: Vec<i64> = vars.iter().map(|&(_, l, u, _)| rng.random_range(l..=u)).collect();

    let all: Vec<(VarId, i64, i64)> = vars.iter().map(|&(id, l, u, _)| (id, l, u)).collect();
    let rows = rng.random_range(1..=cfg.max_rows);
    for _ in 0..rows {
        let (terms, act) = random_row(&mut rng, &all, &point, 4).unwrap();
        let slack = rng.random_range(-1..=2);
        let row = match rng.random_range(0..6) {
            0 => LinearConstraint::from_ints(&terms, Relation::Eq, act),
            1 | 2 => LinearConstraint::from_ints(&terms, Relation::Ge, act - slack),
            _ => LinearConstraint::from_ints(&terms, Relation::Le, act + slack),
        };
        b.exist_row(row);
    }

    let univ: Vec<usize> = (0..n).filter(|&i| vars[i].3 == Quantifier::Forall).collect();
    if !univ.is_empty() && rng.random_bool(cfg.univ_prob) {
        let uv: Vec<(VarId, i64, i64)> = univ.iter().map(|&i| all[i]).collect();
        let up: Vec<i64> = univ.iter().map(|&i| point[i]).collect();
        let (terms, act) = random_row(&mut rng, &uv, &up, 3).unwrap();
        b.univ_row(LinearConstraint::from_ints(&terms, Relation::Le, act + rng.random_range(0..=1)));
    }

    if first == Quantifier::Exists && rng.random_bool(cfg.objective_prob) {
        let mut coeffs = Vec::new();
        for &(id, _, _) in &all {
            let c = rng.random_range(-3..=3);
            if c != 0 && rng.random_bool(0.6) {
                coeffs.push((c, id));
            }
        }
        let sense = if rng.random_bool(0.7) { Sense::Min } else { Sense::Max };
        b.objective(sense, coeffs);
    }
    b.build().expect("random instance is well formed")
}

/// What the oracle and the engine said about one instance.
#[derive(Debug, Clone, Default)]
pub struct CrossCheck {
    pub feasible: Option<bool>,
    /// Optimal value when the instance has an objective and is feasible.
    pub optimum: Option<i64>,
    /// Decision solves made by `optimize`, with the allowed maximum.
    pub opt_calls: Option<(usize, usize)>,
    pub mismatches: Vec<String>,
}

impl CrossCheck {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn pin(inst: &QipInstance, mv: &Assignment) -> QipInstance {
    mv.iter().fold(inst.clone(), |acc, (v, x)| {
        acc.with_exist_row(LinearConstraint::from_ints(&[(1, v)], Relation::Eq, x))
    })
}

/// Runs the engine, the optimizer and `verify_bound` on `inst` and compares
/// every verdict with the brute-force oracle.
pub fn cross_check(inst: &QipInstance, options: &SolveOptions) -> Result<CrossCheck, Refused> {
    let mut out = CrossCheck::default();
    let expected = minimax_feasible(inst)?;
    out.feasible = Some(expected);
    let report = solve_qip(inst, options);
    match &report.outcome {
        SolveOutcome::Unknown(r) => out.mismatches.push(format!("engine unknown: {r:?}")),
        SolveOutcome::Feasible { first_move } => {
            if !expected {
                out.mismatches.push("engine feasible, oracle infeasible".into());
            } else if let Some(mv) = first_move {
                if !minimax_feasible(&pin(inst, mv))? {
                    out.mismatches.push("engine first move is not winning".into());
                }
            }
        }
        SolveOutcome::Infeasible => {
            if expected {
                out.mismatches.push("engine infeasible, oracle feasible".into());
            }
        }
    }

    let Some(obj) = inst.objective() else { return Ok(out) };
    if inst.blocks().first().map(|b| b.quantifier) != Some(Quantifier::Exists) {
        return Ok(out);
    }
    let mm = minimax_value(inst)?;
    let opt = optimize(inst, options).expect("objective and existential start checked");
    out.opt_calls = Some((opt.calls.len(), opt.call_bound()));
    if opt.calls.len() > opt.call_bound() {
        out.mismatches
            .push(format!("optimize used {} calls, bound {}", opt.calls.len(), opt.call_bound()));
    }
    match (&opt.result, mm.value) {
        (OptResult::Optimal { value, first_move }, MinimaxValue::Value(v)) => {
            out.optimum = Some(v);
            if *value != v {
                out.mismatches.push(format!("optimize {value}, oracle {v}"));
            }
            let pinned = minimax_value(&pin(inst, first_move))?;
            if pinned.value != MinimaxValue::Value(v) {
                out.mismatches
                    .push(format!("optimize first move attains {:?}, not {v}", pinned.value));
            }
            let better = match obj.sense {
                Sense::Min => v + 1,
                Sense::Max => v - 1,
            };
            let at = verify_bound(inst, v, options).expect("objective present").0;
            if at != VerifyOutcome::ProvedOptimalAt(v) {
                out.mismatches.push(format!("verify_bound({v}) gave {at:?}"));
            }
            let off = verify_bound(inst, better, options).expect("objective present").0;
            if off != VerifyOutcome::BetterExists {
                out.mismatches.push(format!("verify_bound({better}) gave {off:?}"));
            }
        }
        (OptResult::Infeasible, MinimaxValue::Infeasible) => {}
        (got, want) => out.mismatches.push(format!("optimize {got:?}, oracle {want:?}")),
    }
    Ok(out)
}
