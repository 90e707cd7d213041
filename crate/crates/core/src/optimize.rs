//! Binary search over the objective value using the decision version
//! `c^T x <= z`, and a one-shot check of a claimed optimum.

use std::time::Instant;

use crate::cegar::{solve_qip, SolveOptions, SolveOutcome};
use crate::ip_oracle::UnknownReason;
use crate::model::{objective_bounds, Assignment, Objective, QipInstance, Quantifier, Sense};
use crate::stats::SolveStats;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OptimizeError {
    #[error("the instance has no objective")]
    NoObjective,
    #[error("optimization needs an existential first block")]
    UniversalFirstBlock,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptResult {
    Infeasible,
    Optimal { value: i64, first_move: Assignment },
    Unknown(UnknownReason),
}

/// One decision solve made by the search, in the caller's objective sense.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionCall {
    pub bound: i64,
    /// `None` when the call ended in Unknown.
    pub feasible: Option<bool>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone)]
pub struct OptReport {
    pub result: OptResult,
    /// Objective range over the boxes, in the caller's sense.
    pub bounds: (i64, i64),
    pub calls: Vec<DecisionCall>,
    pub stats: SolveStats,
}

impl OptReport {
    /// `ceil(log2(UB - LB + 1)) + 1`.
    pub fn call_bound(&self) -> usize {
        let width = (self.bounds.1 - self.bounds.0 + 1) as u64;
        let ceil_log = 64 - (width - 1).leading_zeros() as usize;
        ceil_log + 1
    }
}

/// The instance with a minimization objective; `flip` tells whether values
/// must be negated back.
fn as_min(inst: &QipInstance) -> Result<(QipInstance, Objective, bool), OptimizeError> {
    let obj = inst.objective().ok_or(OptimizeError::NoObjective)?;
    if inst.blocks().first().is_some_and(|b| b.quantifier == Quantifier::Forall) {
        return Err(OptimizeError::UniversalFirstBlock);
    }
    let flip = obj.sense == Sense::Max;
    let min_obj = Objective {
        sense: Sense::Min,
        coeffs: obj
            .coeffs
            .iter()
            .map(|&(c, v)| (if flip { -c } else { c }, v))
            .collect(),
    };
    Ok((inst.with_objective(Some(min_obj.clone())), min_obj, flip))
}

pub fn optimize(inst: &QipInstance, options: &SolveOptions) -> Result<OptReport, OptimizeError> {
    let start = Instant::now();
    let (work, obj, flip) = as_min(inst)?;
    let (mut lb, mut ub) = objective_bounds(&work);
    let shown = |z: i64| if flip { -z } else { z };
    let bounds = if flip { (-ub, -lb) } else { (lb, ub) };
    let mut calls = Vec::new();
    let mut stats = SolveStats::default();
    let decide = |z: i64, calls: &mut Vec<DecisionCall>, stats: &mut SolveStats| {
        let report = solve_qip(&work.with_exist_row(obj.row_le(z)), options);
        stats.absorb(&report.stats);
        let feasible = match &report.outcome {
            SolveOutcome::Feasible { .. } => Some(true),
            SolveOutcome::Infeasible => Some(false),
            SolveOutcome::Unknown(_) => None,
        };
        calls.push(DecisionCall {
            bound: shown(z),
            feasible,
            stats: report.stats,
        });
        report.outcome
    };

    let finish = |result: OptResult, calls: Vec<DecisionCall>, mut stats: SolveStats| {
        stats.wall_ms = start.elapsed().as_millis() as u64;
        stats.outcome = match &result {
            OptResult::Infeasible => "infeasible",
            OptResult::Optimal { .. } => "optimal",
            OptResult::Unknown(_) => "unknown",
        }
        .to_string();
        Ok(OptReport {
            result,
            bounds,
            calls,
            stats,
        })
    };

    let mut best = match decide(ub, &mut calls, &mut stats) {
        SolveOutcome::Feasible { first_move } => first_move.unwrap_or_default(),
        SolveOutcome::Infeasible => return finish(OptResult::Infeasible, calls, stats),
        SolveOutcome::Unknown(r) => return finish(OptResult::Unknown(r), calls, stats),
    };
    while ub > lb {
        let z = lb + (ub - lb).div_euclid(2);
        match decide(z, &mut calls, &mut stats) {
            SolveOutcome::Feasible { first_move } => {
                ub = z;
                best = first_move.unwrap_or_default();
            }
            SolveOutcome::Infeasible => lb = z + 1,
            SolveOutcome::Unknown(r) => return finish(OptResult::Unknown(r), calls, stats),
        }
    }
    finish(
        OptResult::Optimal {
            value: shown(ub),
            first_move: best,
        },
        calls,
        stats,
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyOutcome {
    ProvedOptimalAt(i64),
    /// Some strategy guarantees a strictly better value; which one is not reported.
    BetterExists,
    Unknown(UnknownReason),
}

/// Checks that no strategy guarantees a value strictly better than `z`.
pub fn verify_bound(inst: &QipInstance, z: i64, options: &SolveOptions) -> Result<(VerifyOutcome, SolveStats), OptimizeError> {
    let obj = inst.objective().ok_or(OptimizeError::NoObjective)?;
    let row = match obj.sense {
        Sense::Min => obj.row_le(z - 1),
        Sense::Max => obj.row_ge(z + 1),
    };
    let report = solve_qip(&inst.with_exist_row(row), options);
    let outcome = match report.outcome {
        SolveOutcome::Feasible { .. } => VerifyOutcome::BetterExists,
        SolveOutcome::Infeasible => VerifyOutcome::ProvedOptimalAt(z),
        SolveOutcome::Unknown(r) => VerifyOutcome::Unknown(r),
    };
    Ok((outcome, report.stats))
}
