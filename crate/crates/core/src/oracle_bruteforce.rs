//! Exhaustive game-tree evaluation, kept deliberately simple and independent
//! of the IP kernel: rows are scaled to integers here, universal domains are
//! decided by enumeration.
//!
//! Node values are ordered `Vacuous < Finite < Infeasible`. Existential nodes
//! take the minimum, universal nodes the maximum, so `Infeasible` propagates
//! up through universal nodes and out of existential nodes with no escape.
//! A universal block whose restricted domain is empty has no move at all;
//! that node is `Vacuous`, an existential win.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::model::{Assignment, LinearConstraint, QipInstance, Quantifier, Relation, Sense, VarId};

pub const LEAF_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("game tree exceeds {limit} leaves; refusing to enumerate")]
pub struct Refused {
    pub limit: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Val {
    Vacuous,
    Finite(i64),
    Infeasible,
}

impl Val {
    fn rank(self) -> (u8, i64) {
        match self {
            Val::Vacuous => (0, 0),
            Val::Finite(v) => (1, v),
            Val::Infeasible => (2, 0),
        }
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

/// Optimal worst-case value of the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimaxValue {
    Value(i64),
    /// No winning strategy for the existential player.
    Infeasible,
    /// The existential player wins because some universal block has no legal move.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaxResult {
    pub value: MinimaxValue,
    /// Best first-block move when the first block is existential and the game is won.
    pub first_move: Option<Assignment>,
}

struct IntRow {
    terms: Vec<(i128, usize)>,
    relation: Relation,
    rhs: i128,
    last: Option<usize>,
}

impl IntRow {
    fn holds(&self, values: &[i64]) -> bool {
        let lhs: i128 = self.terms.iter().map(|&(a, p)| a * values[p] as i128).sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

fn scale(row: &LinearConstraint, pos: &[usize]) -> IntRow {
    let d = row
        .terms()
        .iter()
        .map(|(c, _)| c.denom().clone())
        .chain(std::iter::once(row.rhs().denom().clone()))
        .fold(BigInt::one(), |acc, x| acc.lcm(&x));
    let to_int = |r: &crate::rational::Rational| -> i128 {
        (r * crate::rational::Rational::from_integer(d.clone()))
            .to_integer()
            .to_i128()
            .expect("coefficients too large for enumeration")
    };
    let terms: Vec<(i128, usize)> = row.terms().iter().map(|(c, v)| (to_int(c), pos[v.index()])).collect();
    let last = terms.iter().map(|&(_, p)| p).max();
    IntRow {
        terms,
        relation: row.relation(),
        rhs: to_int(row.rhs()),
        last,
    }
}

struct Tree {
    order: Vec<VarId>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    quant: Vec<Quantifier>,
    block_start: Vec<bool>,
    block_end: Vec<bool>,
    rows: Vec<IntRow>,
    rows_at: Vec<Vec<usize>>,
    univ: Vec<IntRow>,
    univ_positions: Vec<usize>,
    objective: Vec<(i64, usize)>,
    prune: bool,
    feasibility_only: bool,
    leaves: u64,
    limit: u64,
    values: Vec<i64>,
}

impl Tree {
    fn new(inst: &QipInstance, limit: u64) -> Tree {
        let order: Vec<VarId> = inst.blocks().iter().flat_map(|b| b.vars.iter().copied()).collect();
        let mut pos = vec![usize::MAX; inst.variables().len()];
        for (p, v) in order.iter().enumerate() {
            pos[v.index()] = p;
        }
        let mut block_start = vec![false; order.len()];
        let mut block_end = vec![false; order.len()];
        let mut p = 0;
        for b in inst.blocks() {
            block_start[p] = true;
            p += b.vars.len();
            block_end[p - 1] = true;
        }
        let rows: Vec<IntRow> = inst.exist_system().iter().map(|r| scale(r, &pos)).collect();
        let mut rows_at = vec![Vec::new(); order.len()];
        for (i, r) in rows.iter().enumerate() {
            if let Some(l) = r.last {
                rows_at[l].push(i);
            }
        }
        let univ: Vec<IntRow> = inst.univ_system().iter().map(|r| scale(r, &pos)).collect();
        let univ_positions: Vec<usize> = (0..order.len())
            .filter(|&p| inst.variable(order[p]).quantifier == Quantifier::Forall)
            .collect();
        let sign = match inst.objective().map(|o| o.sense) {
            Some(Sense::Max) => -1,
            _ => 1,
        };
        let objective = inst
            .objective()
            .map(|o| o.coeffs.iter().map(|&(c, v)| (sign * c, pos[v.index()])).collect())
            .unwrap_or_default();
        let mut t = Tree {
            lo: order.iter().map(|v| inst.variable(*v).lower).collect(),
            hi: order.iter().map(|v| inst.variable(*v).upper).collect(),
            quant: order.iter().map(|v| inst.variable(*v).quantifier).collect(),
            values: vec![0; order.len()],
            order,
            block_start,
            block_end,
            rows,
            rows_at,
            univ,
            univ_positions,
            objective,
            prune: false,
            feasibility_only: inst.objective().is_none(),
            leaves: 0,
            limit,
        };
        // Early row checks are sound only when no universal block can run out of moves.
        t.prune = t.extends(0);
        t
    }

    /// Whether the universal values at positions `< from` extend to all later
    /// universal positions satisfying every uncertainty row.
    fn extends(&mut self, from: usize) -> bool {
        let later: Vec<usize> = self.univ_positions.iter().copied().filter(|&p| p >= from).collect();
        let fixed_ok = self
            .univ
            .iter()
            .filter(|r| r.last.is_none_or(|l| l < from))
            .all(|r| r.holds(&self.values));
        fixed_ok && self.extend_from(&later, 0)
    }

    fn extend_from(&mut self, later: &[usize], k: usize) -> bool {
        let Some(&p) = later.get(k) else {
            return true;
        };
        let saved = self.values[p];
        for x in self.lo[p]..=self.hi[p] {
            self.values[p] = x;
            let ok = self.univ.iter().filter(|r| r.last == Some(p)).all(|r| r.holds(&self.values));
            if ok && self.extend_from(later, k + 1) {
                self.values[p] = saved;
                return true;
            }
        }
        self.values[p] = saved;
        false
    }

    fn leaf(&mut self) -> Result<Val, Refused> {
        self.leaves += 1;
        if self.leaves > self.limit {
            return Err(Refused { limit: self.limit });
        }
        if !self.prune && !self.rows.iter().all(|r| r.holds(&self.values)) {
            return Ok(Val::Infeasible);
        }
        if self.prune && !self.rows.iter().filter(|r| r.last.is_none()).all(|r| r.holds(&self.values)) {
            return Ok(Val::Infeasible);
        }
        Ok(Val::Finite(self.objective.iter().map(|&(c, p)| c * self.values[p]).sum()))
    }

    /// Value of the subtree below position `p`; `None` when every value of a
    /// universal block in progress falls outside its restricted domain.
    fn eval(&mut self, p: usize) -> Result<Option<Val>, Refused> {
        if p == self.order.len() {
            return self.leaf().map(Some);
        }
        let q = self.quant[p];
        let mut best: Option<Val> = None;
        for x in self.lo[p]..=self.hi[p] {
            self.values[p] = x;
            if q == Quantifier::Forall && self.block_end[p] && !self.extends(p + 1) {
                continue;
            }
            let violated = self.prune && self.rows_at[p].iter().any(|&i| !self.rows[i].holds(&self.values));
            let child = if !violated {
                self.eval(p + 1)?
            } else if q == Quantifier::Forall && !self.block_end[p] && !self.extends(p + 1) {
                // Mid-block the value may still be illegal; a violated row only
                // counts once some legal completion of the block exists.
                None
            } else {
                Some(Val::Infeasible)
            };
            let Some(child) = child else { continue };
            best = Some(match (best, q) {
                (None, _) => child,
                (Some(b), Quantifier::Exists) => b.min(child),
                (Some(b), Quantifier::Forall) => b.max(child),
            });
            if self.feasibility_only {
                match (q, best) {
                    (Quantifier::Exists, Some(v)) if v != Val::Infeasible => break,
                    (Quantifier::Forall, Some(Val::Infeasible)) => break,
                    _ => {}
                }
            }
        }
        if best.is_none() && q == Quantifier::Forall && self.block_start[p] {
            return Ok(Some(Val::Vacuous));
        }
        Ok(best)
    }

    /// Enumerates the first block explicitly to remember the best move.
    fn root(&mut self) -> Result<(Val, Option<Vec<i64>>), Refused> {
        let first_len = self.block_end.iter().position(|&e| e).map_or(0, |i| i + 1);
        if first_len == 0 {
            return Ok((self.leaf()?, None));
        }
        if self.quant[0] == Quantifier::Forall {
            return Ok((self.eval(0)?.unwrap_or(Val::Vacuous), None));
        }
        let mut best: Option<(Val, Vec<i64>)> = None;
        for p in 0..first_len {
            self.values[p] = self.lo[p];
        }
        loop {
            let violated = self.prune
                && (0..first_len).any(|p| self.rows_at[p].iter().any(|&i| !self.rows[i].holds(&self.values)));
            let v = if violated {
                Val::Infeasible
            } else {
                self.eval(first_len)?.expect("existential subtree always has a value")
            };
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, self.values[..first_len].to_vec()));
            }
            if self.feasibility_only && v != Val::Infeasible {
                break;
            }
            // Odometer step, last position fastest.
            let mut p = first_len;
            loop {
                if p == 0 {
                    let (v, m) = best.expect("first block is nonempty");
                    return Ok((v, Some(m)));
                }
                p -= 1;
                if self.values[p] < self.hi[p] {
                    self.values[p] += 1;
                    break;
                }
                self.values[p] = self.lo[p];
            }
        }
        let (v, m) = best.expect("loop ran at least once");
        Ok((v, Some(m)))
    }
}

fn evaluate(inst: &QipInstance, limit: u64) -> Result<MinimaxResult, Refused> {
    let mut tree = Tree::new(inst, limit);
    let (val, mv) = tree.root()?;
    let negate = inst.objective().is_some_and(|o| o.sense == Sense::Max);
    let value = match val {
        Val::Infeasible => MinimaxValue::Infeasible,
        Val::Vacuous => MinimaxValue::Vacuous,
        Val::Finite(v) => MinimaxValue::Value(if negate { -v } else { v }),
    };
    let first_move = match (value, mv) {
        (MinimaxValue::Infeasible, _) | (_, None) => None,
        (_, Some(m)) => Some(tree.order.iter().zip(m).map(|(v, x)| (*v, x)).collect()),
    };
    Ok(MinimaxResult { value, first_move })
}

/// True iff the existential player has a winning strategy.
pub fn minimax_feasible(inst: &QipInstance) -> Result<bool, Refused> {
    minimax_feasible_with_limit(inst, LEAF_LIMIT)
}

pub fn minimax_feasible_with_limit(inst: &QipInstance, limit: u64) -> Result<bool, Refused> {
    let stripped = inst.with_objective(None);
    Ok(evaluate(&stripped, limit)?.value != MinimaxValue::Infeasible)
}

/// Optimal worst-case objective value; without an objective every win has value 0.
pub fn minimax_value(inst: &QipInstance) -> Result<MinimaxResult, Refused> {
    evaluate(inst, LEAF_LIMIT)
}

pub fn minimax_value_with_limit(inst: &QipInstance, limit: u64) -> Result<MinimaxResult, Refused> {
    evaluate(inst, limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_one, parity_game};
    use crate::model::QipBuilder;

    #[test]
    fn worked_example_is_lost() {
        assert_eq!(minimax_feasible(&parity_game()), Ok(false));
    }

    #[test]
    fn example_one_decision_thresholds() {
        let inst = example_one();
        let obj = inst.objective().unwrap().clone();
        assert_eq!(minimax_feasible(&inst.with_exist_row(obj.row_le(-1))), Ok(true));
        assert_eq!(minimax_feasible(&inst.with_exist_row(obj.row_le(-2))), Ok(false));
    }

    #[test]
    fn example_one_value_and_move() {
        let r = minimax_value(&example_one()).unwrap();
        assert_eq!(r.value, MinimaxValue::Value(-1));
        assert_eq!(r.first_move.unwrap().get(VarId(0)), Some(1));
    }

    #[test]
    fn example_one_strategy_with_two() {
        let inst = example_one();
        let forced = inst.with_exist_row(LinearConstraint::from_ints(&[(1, VarId(0))], Relation::Ge, 2));
        assert_eq!(minimax_value(&forced).unwrap().value, MinimaxValue::Value(1));
    }

    #[test]
    fn example_one_without_uncertainty_is_lost() {
        let inst = example_one().with_univ_system(vec![]);
        assert_eq!(minimax_value(&inst).unwrap().value, MinimaxValue::Infeasible);
    }

    #[test]
    fn single_block_is_ip_optimum() {
        let mut b = QipBuilder::new();
        let x = b.var("x", Quantifier::Exists, 0, 4);
        let y = b.var("y", Quantifier::Exists, 0, 4);
        b.exist_row(LinearConstraint::from_ints(&[(2, x), (3, y)], Relation::Le, 12));
        b.objective(Sense::Max, vec![(3, x), (4, y)]);
        let r = minimax_value(&b.build().unwrap()).unwrap();
        assert_eq!(r.value, MinimaxValue::Value(17));
    }

    #[test]
    fn empty_restricted_domain_is_vacuous() {
        let mut b = QipBuilder::new();
        let z = b.binary("z", Quantifier::Forall);
        let x = b.binary("x", Quantifier::Exists);
        b.exist_row(LinearConstraint::from_ints(&[(1, x)], Relation::Le, -1));
        b.univ_row(LinearConstraint::from_ints(&[(1, z)], Relation::Ge, 2));
        let r = minimax_value(&b.build().unwrap()).unwrap();
        assert_eq!(r.value, MinimaxValue::Vacuous);
    }

    #[test]
    fn leaf_guard_refuses() {
        let mut b = QipBuilder::new();
        for i in 0..12 {
            b.binary(format!("x{i}"), Quantifier::Exists);
        }
        let inst = b.build().unwrap().with_objective(Some(crate::model::Objective {
            sense: Sense::Min,
            coeffs: vec![(1, VarId(0))],
        }));
        assert_eq!(minimax_value_with_limit(&inst, 100), Err(Refused { limit: 100 }));
    }

    #[test]
    fn dependent_domain_is_enforced() {
        // A u1 E x A u2 with u1 + u2 <= 1; rows force x to guess.
        let mut b = QipBuilder::new();
        let u1 = b.binary("u1", Quantifier::Forall);
        let x = b.binary("x", Quantifier::Exists);
        let u2 = b.binary("u2", Quantifier::Forall);
        b.univ_row(LinearConstraint::from_ints(&[(1, u1), (1, u2)], Relation::Le, 1));
        // x must equal u2 unless u1 = 1 (then u2 = 0 is forced, so x = 0 works).
        b.exist_row(LinearConstraint::from_ints(&[(1, x), (-1, u2)], Relation::Ge, 0));
        b.exist_row(LinearConstraint::from_ints(&[(1, x), (1, u1)], Relation::Le, 1));
        let inst = b.build().unwrap();
        // u1 = 1: x = 0 required, u2 in {0}: x >= 0 holds. u1 = 0: x = 1 covers u2 in {0,1}.
        assert_eq!(minimax_feasible(&inst), Ok(true));
        let loose = inst.with_univ_system(vec![]);
        assert_eq!(minimax_feasible(&loose), Ok(false));
    }

    #[test]
    fn illegal_universal_value_mid_block_is_ignored() {
        // u1 = 0 violates the first row but is also outside the uncertainty set,
        // which is only known once u2 is reached.
        let mut b = QipBuilder::new();
        let u1 = b.var("u1", Quantifier::Forall, -1, 0);
        let u2 = b.var("u2", Quantifier::Forall, 1, 1);
        b.univ_row(LinearConstraint::from_ints(&[(1, u1), (-1, u2)], Relation::Le, -2));
        b.exist_row(LinearConstraint::from_ints(&[(2, u1)], Relation::Le, -2));
        let inst = b.build().unwrap();
        assert_eq!(minimax_feasible(&inst), Ok(true));
        assert_eq!(minimax_feasible(&inst.with_univ_system(vec![])), Ok(false));
    }
}
