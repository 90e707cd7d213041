//! Depth-first branch and bound with interval propagation at every node.
//!
//! Rows are scaled to integer coefficients once (`sum a_i x_i <= floor(b * d)`),
//! activities are tracked in `i128`. Branching picks the variable with the
//! widest remaining domain (lowest index on ties) and explores `x = lo` before
//! `x >= lo + 1`. With an objective, every incumbent tightens a cutoff row
//! `c^T x <= best - 1`.

use std::collections::VecDeque;

use num_traits::Zero;

use super::{Budget, IpOutcome, IpProblem, UnknownReason};
use crate::model::{Assignment, Sense, VarId};
use crate::rational::{lcm_of_denominators, to_i128, Rational};

#[derive(Debug, Clone)]
struct IntRow {
    terms: Vec<(i128, usize)>,
    rhs: i128,
}

#[derive(Debug, Clone)]
struct Compiled {
    lo: Vec<i64>,
    hi: Vec<i64>,
    rows: Vec<IntRow>,
    occurs: Vec<Vec<usize>>,
}

fn scale_row(terms: &[(Rational, VarId)], rhs: &Rational, index_of: &dyn Fn(VarId) -> usize) -> Result<IntRow, UnknownReason> {
    let d = Rational::from_integer(lcm_of_denominators(terms.iter().map(|(c, _)| c)));
    let mut out = Vec::with_capacity(terms.len());
    for (c, v) in terms {
        if c.is_zero() {
            continue;
        }
        let scaled = (c * &d).to_integer();
        out.push((to_i128(&scaled).ok_or(UnknownReason::Overflow)?, index_of(*v)));
    }
    let rhs = (rhs * &d).floor().to_integer();
    Ok(IntRow {
        terms: out,
        rhs: to_i128(&rhs).ok_or(UnknownReason::Overflow)?,
    })
}

fn compile(p: &IpProblem) -> Result<Compiled, UnknownReason> {
    let index: std::collections::HashMap<VarId, usize> =
        p.vars.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
    let index_of = |v: VarId| -> usize {
        *index
            .get(&v)
            .unwrap_or_else(|| panic!("IP row references undeclared variable {v}"))
    };
    let mut rows = Vec::new();
    for row in &p.rows {
        for le in row.to_le() {
            rows.push(scale_row(le.terms(), le.rhs(), &index_of)?);
        }
    }
    let mut occurs = vec![Vec::new(); p.vars.len()];
    for (r, row) in rows.iter().enumerate() {
        for &(_, j) in &row.terms {
            occurs[j].push(r);
        }
    }
    Ok(Compiled {
        lo: p.vars.iter().map(|v| v.lower).collect(),
        hi: p.vars.iter().map(|v| v.upper).collect(),
        rows,
        occurs,
    })
}

enum Fixpoint {
    Consistent,
    Conflict,
}

fn term_min(a: i128, lo: i64, hi: i64) -> Option<i128> {
    if a >= 0 {
        a.checked_mul(lo as i128)
    } else {
        a.checked_mul(hi as i128)
    }
}

/// Interval propagation to a fixpoint. Bounds are only ever tightened by
/// rounding toward feasibility, so no integer solution is lost.
fn propagate(
    rows: &[IntRow],
    occurs: &[Vec<usize>],
    lo: &mut [i64],
    hi: &mut [i64],
) -> Result<Fixpoint, UnknownReason> {
    if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
        return Ok(Fixpoint::Conflict);
    }
    let mut queue: VecDeque<usize> = (0..rows.len()).collect();
    let mut queued = vec![true; rows.len()];
    while let Some(r) = queue.pop_front() {
        queued[r] = false;
        let row = &rows[r];
        let mut min_act: i128 = 0;
        for &(a, j) in &row.terms {
            let t = term_min(a, lo[j], hi[j]).ok_or(UnknownReason::Overflow)?;
            min_act = min_act.checked_add(t).ok_or(UnknownReason::Overflow)?;
        }
        let slack = row.rhs.checked_sub(min_act).ok_or(UnknownReason::Overflow)?;
        if slack < 0 {
            return Ok(Fixpoint::Conflict);
        }
        for &(a, j) in &row.terms {
            let width = (hi[j] as i128) - (lo[j] as i128);
            let reach = a.abs().checked_mul(width).ok_or(UnknownReason::Overflow)?;
            if reach <= slack {
                continue;
            }
            let step = (slack / a.abs()) as i64;
            if a > 0 {
                hi[j] = lo[j] + step;
            } else {
                lo[j] = hi[j] - step;
            }
            for &other in &occurs[j] {
                if other != r && !queued[other] {
                    queued[other] = true;
                    queue.push_back(other);
                }
            }
        }
    }
    Ok(Fixpoint::Consistent)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarBounds {
    pub id: VarId,
    pub lower: i64,
    pub upper: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    Tightened(Vec<VarBounds>),
    Conflict,
}

/// Root-node interval propagation of `p`. On arithmetic overflow the
/// declared bounds are returned unchanged.
pub fn propagate_bounds(p: &IpProblem) -> Propagation {
    let declared = || {
        p.vars
            .iter()
            .map(|v| VarBounds {
                id: v.id,
                lower: v.lower,
                upper: v.upper,
            })
            .collect()
    };
    let Ok(mut c) = compile(p) else {
        return Propagation::Tightened(declared());
    };
    match propagate(&c.rows, &c.occurs, &mut c.lo, &mut c.hi) {
        Ok(Fixpoint::Conflict) => Propagation::Conflict,
        Ok(Fixpoint::Consistent) => Propagation::Tightened(
            p.vars
                .iter()
                .enumerate()
                .map(|(i, v)| VarBounds {
                    id: v.id,
                    lower: c.lo[i],
                    upper: c.hi[i],
                })
                .collect(),
        ),
        Err(_) => Propagation::Tightened(declared()),
    }
}

struct Incumbent {
    point: Vec<i64>,
    value: i128,
}

pub(super) fn branch_and_bound(p: &IpProblem, budget: &Budget) -> IpOutcome {
    match search(p, budget) {
        Ok(Some(point)) => {
            let witness: Assignment = p
                .vars
                .iter()
                .zip(&point)
                .map(|(v, x)| (v.id, *x))
                .collect();
            if !p.is_satisfied_by(&witness) {
                return IpOutcome::Unknown(UnknownReason::External(
                    "built-in kernel produced a witness that fails exact verification".into(),
                ));
            }
            let value = p.objective_value(&witness);
            IpOutcome::Feasible { witness, value }
        }
        Ok(None) => IpOutcome::Infeasible,
        Err(reason) => IpOutcome::Unknown(reason),
    }
}

fn search(p: &IpProblem, budget: &Budget) -> Result<Option<Vec<i64>>, UnknownReason> {
    let mut c = compile(p)?;
    let index: std::collections::HashMap<VarId, usize> =
        p.vars.iter().enumerate().map(|(i, v)| (v.id, i)).collect();

    // Objective in minimization form, plus its cutoff row (inactive until an incumbent exists).
    let objective: Option<Vec<(i128, usize)>> = p.objective.as_ref().map(|obj| {
        let sign = match obj.sense {
            Sense::Min => 1,
            Sense::Max => -1,
        };
        obj.coeffs
            .iter()
            .filter(|(a, _)| *a != 0)
            .map(|&(a, v)| (sign * a as i128, index[&v]))
            .collect()
    });
    let cutoff = objective.as_ref().map(|terms| {
        let r = c.rows.len();
        c.rows.push(IntRow {
            terms: terms.clone(),
            rhs: i128::MAX / 4,
        });
        for &(_, j) in terms {
            c.occurs[j].push(r);
        }
        r
    });

    let mut incumbent: Option<Incumbent> = None;
    let mut stack = vec![(c.lo.clone(), c.hi.clone())];
    let mut nodes: u64 = 0;
    while let Some((mut lo, mut hi)) = stack.pop() {
        nodes += 1;
        if budget.max_nodes.is_some_and(|m| nodes > m) {
            return Err(UnknownReason::NodeLimit);
        }
        if nodes % 256 == 0 && budget.expired() {
            return Err(UnknownReason::TimeLimit);
        }
        if let Fixpoint::Conflict = propagate(&c.rows, &c.occurs, &mut lo, &mut hi)? {
            continue;
        }
        let branch = (0..lo.len())
            .filter(|&j| hi[j] > lo[j])
            .max_by(|&a, &b| {
                let wa = hi[a] as i128 - lo[a] as i128;
                let wb = hi[b] as i128 - lo[b] as i128;
                wa.cmp(&wb).then(b.cmp(&a))
            });
        match branch {
            None => match &objective {
                None => return Ok(Some(lo)),
                Some(terms) => {
                    let value: i128 = terms.iter().map(|&(a, j)| a * lo[j] as i128).sum();
                    if incumbent.as_ref().is_none_or(|inc| value < inc.value) {
                        let r = cutoff.expect("cutoff row exists with an objective");
                        c.rows[r].rhs = value - 1;
                        incumbent = Some(Incumbent { point: lo, value });
                    }
                }
            },
            Some(j) => {
                let mut up_lo = lo.clone();
                up_lo[j] = lo[j] + 1;
                stack.push((up_lo, hi.clone()));
                let mut down_hi = hi;
                down_hi[j] = lo[j];
                stack.push((lo, down_hi));
            }
        }
    }
    Ok(incumbent.map(|inc| inc.point))
}
