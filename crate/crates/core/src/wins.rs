//! Base case of the recursion: a multi-game whose subgames are all
//! quantifier-free is decided by one integer program.
//!
//! For the existential player the subgame systems are simply conjoined. For
//! the universal player every row `a x <= b` of subgame `l` gets an indicator
//! `y` through the row
//!
//! ```text
//! -a x - (L - b - r) y <= -L
//! ```
//!
//! where `L` is a lower bound on `a x` over the boxes and `r` the smallest
//! possible violation, so `y = 1` forces `a x >= b + r`. Indicators `v_l <= sum y`
//! and `v <= v_l`, `v >= 1` then demand that every subgame is violated.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::ip_oracle::{Budget, IpOracle, IpOutcome, IpProblem, IpVar, UnknownReason};
use crate::model::{min_activity, Assignment, LinearConstraint, Quantifier, VarId, VarTable};
use crate::rational::{decimal_places, int, lcm_of_denominators, Rational};

/// How the minimal violation `r` of a row is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViolationRule {
    /// `10^-p` for the largest number `p` of decimal places among the row's
    /// data, falling back to the lcd rule when some datum does not terminate.
    #[default]
    Decimal,
    /// Reciprocal of the lowest common denominator of the row's data.
    Lcd,
}

/// `sum_{a<0} a u + sum_{a>=0} a l` over the given boxes.
pub fn row_lower_bound(row: &LinearConstraint, bounds: impl Fn(VarId) -> (i64, i64)) -> Rational {
    min_activity(row, bounds)
}

fn row_data(row: &LinearConstraint) -> impl Iterator<Item = &Rational> + Clone {
    row.terms().iter().map(|(c, _)| c).chain(std::iter::once(row.rhs()))
}

pub fn min_violation_lcd(row: &LinearConstraint) -> Rational {
    Rational::new(BigInt::one(), lcm_of_denominators(row_data(row)))
}

pub fn min_violation(row: &LinearConstraint) -> Rational {
    let places: Option<Vec<u32>> = row_data(row).map(decimal_places).collect();
    match places {
        Some(p) => {
            let p = p.into_iter().max().unwrap_or(0);
            Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), p as usize))
        }
        None => min_violation_lcd(row),
    }
}

pub fn violation_step(row: &LinearConstraint, rule: ViolationRule) -> Rational {
    match rule {
        ViolationRule::Decimal => min_violation(row),
        ViolationRule::Lcd => min_violation_lcd(row),
    }
}

/// A `<=` row of a subgame together with a lower bound on its activity.
///
/// The bound is computed once from the original boxes; instantiating a
/// variable moves the same amount off both the activity and the bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameRow {
    pub row: LinearConstraint,
    pub floor: Rational,
}

impl GameRow {
    pub fn new(row: LinearConstraint, bounds: impl Fn(VarId) -> (i64, i64)) -> Self {
        debug_assert_eq!(row.relation(), crate::model::Relation::Le);
        let floor = row_lower_bound(&row, bounds);
        GameRow { row, floor }
    }

    pub fn instantiate(&self, a: &Assignment) -> GameRow {
        let shift = self
            .row
            .terms()
            .iter()
            .filter_map(|(c, v)| a.get(*v).map(|x| c * int(x)))
            .fold(Rational::zero(), |acc, t| acc + t);
        GameRow {
            row: self.row.instantiate(a),
            floor: &self.floor - shift,
        }
    }

    pub fn rename(&self, map: impl Fn(VarId) -> VarId) -> GameRow {
        GameRow {
            row: self.row.rename(map),
            floor: self.floor.clone(),
        }
    }
}

/// Normalizes `system` to `<=` rows and attaches box lower bounds.
pub fn game_rows(system: &[LinearConstraint], vt: &VarTable) -> Vec<GameRow> {
    system
        .iter()
        .flat_map(|r| r.to_le())
        .map(|r| GameRow::new(r, |v| vt.bounds(v)))
        .collect()
}

/// Outer variables first, then every other variable the rows mention, ascending.
fn ip_vars<'a>(outer: &[VarId], rows: impl Iterator<Item = &'a LinearConstraint>, vt: &VarTable) -> Vec<IpVar> {
    let mut seen: BTreeSet<VarId> = outer.iter().copied().collect();
    let mut extra = BTreeSet::new();
    for row in rows {
        for v in row.vars() {
            if !seen.contains(&v) {
                extra.insert(v);
            }
        }
    }
    seen.clear();
    let mut out = Vec::new();
    for &v in outer.iter().chain(extra.iter()) {
        if seen.insert(v) {
            out.push(vt.ip_var(v));
        }
    }
    out
}

/// Problem (1): all subgame rows at once.
pub fn build_exists_ip(outer: &[VarId], subgames: &[Vec<GameRow>], vt: &VarTable) -> IpProblem {
    let rows: Vec<LinearConstraint> = subgames.iter().flatten().map(|g| g.row.clone()).collect();
    IpProblem::feasibility(ip_vars(outer, rows.iter(), vt), rows)
}

/// Indicator variables and constants of one Problem (2) instance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ViolationGadget {
    /// `L` per subgame and row.
    pub floors: Vec<Vec<Rational>>,
    /// `r` per subgame and row.
    pub steps: Vec<Vec<Rational>>,
    pub y: Vec<Vec<VarId>>,
    pub v_sub: Vec<VarId>,
    pub v: Option<VarId>,
}

/// Problem (2). Indicator ids are numbered past the variable table; they
/// never escape this problem.
pub fn build_forall_ip(
    outer: &[VarId],
    subgames: &[Vec<GameRow>],
    univ_rows: &[LinearConstraint],
    vt: &VarTable,
    rule: ViolationRule,
) -> (IpProblem, ViolationGadget) {
    let mut vars = ip_vars(
        outer,
        subgames.iter().flatten().map(|g| &g.row).chain(univ_rows.iter()),
        vt,
    );
    let mut rows: Vec<LinearConstraint> = univ_rows.iter().flat_map(|r| r.to_le()).collect();
    let mut gadget = ViolationGadget::default();
    let mut next = vt.len() as u32;
    let mut fresh = |name: String, vars: &mut Vec<IpVar>| {
        let id = VarId(next);
        next += 1;
        vars.push(IpVar {
            id,
            name,
            lower: 0,
            upper: 1,
        });
        id
    };
    if !subgames.is_empty() {
        let v = fresh("v".into(), &mut vars);
        gadget.v = Some(v);
        for (l, system) in subgames.iter().enumerate() {
            let v_l = fresh(format!("v{l}"), &mut vars);
            let (mut ys, mut floors, mut steps) = (Vec::new(), Vec::new(), Vec::new());
            for (j, g) in system.iter().enumerate() {
                let y = fresh(format!("y{l}_{j}"), &mut vars);
                let r = violation_step(&g.row, rule);
                let b = g.row.rhs();
                let y_coef = -(&g.floor - b - &r);
                let mut terms: Vec<(Rational, VarId)> = g.row.terms().iter().map(|(c, x)| (-c, *x)).collect();
                terms.push((y_coef, y));
                rows.push(LinearConstraint::le(terms, -&g.floor));
                ys.push(y);
                floors.push(g.floor.clone());
                steps.push(r);
            }
            // v_l <= sum_j y_j
            let mut terms = vec![(int(1), v_l)];
            terms.extend(ys.iter().map(|&y| (int(-1), y)));
            rows.push(LinearConstraint::le(terms, int(0)));
            // v <= v_l
            rows.push(LinearConstraint::le([(int(1), v), (int(-1), v_l)], int(0)));
            gadget.y.push(ys);
            gadget.floors.push(floors);
            gadget.steps.push(steps);
            gadget.v_sub.push(v_l);
        }
        rows.push(LinearConstraint::le([(int(-1), v)], int(-1)));
    }
    (IpProblem::feasibility(vars, rows), gadget)
}

/// Everything `wins` needs besides the game itself.
pub struct WinsContext<'a> {
    pub vt: &'a VarTable,
    pub oracle: &'a IpOracle,
    pub budget: &'a Budget,
    pub rule: ViolationRule,
}

/// Decides a multi-game with quantifier-free subgames. Returns the winning
/// move restricted to `outer`, `None` when the player has none.
pub fn wins(
    q: Quantifier,
    outer: &[VarId],
    univ_rows: &[LinearConstraint],
    subgames: &[Vec<GameRow>],
    ctx: &WinsContext<'_>,
) -> Result<Option<Assignment>, UnknownReason> {
    let problem = match q {
        Quantifier::Exists => build_exists_ip(outer, subgames, ctx.vt),
        Quantifier::Forall => build_forall_ip(outer, subgames, univ_rows, ctx.vt, ctx.rule).0,
    };
    match ctx.oracle.solve(&problem, ctx.budget) {
        IpOutcome::Feasible { witness, .. } => Ok(Some(witness.restrict(outer))),
        IpOutcome::Infeasible => Ok(None),
        IpOutcome::Unknown(reason) => Err(reason),
    }
}
