//! Feasibility and optimization of quantifier-free bounded integer linear
//! systems: a built-in branch-and-bound kernel plus an adapter that hands the
//! problem to an external solver through LP files.

mod external;
mod kernel;
mod lp_format;

use std::fmt;
use std::time::{Duration, Instant};

use num_traits::Zero;

use crate::model::{Assignment, LinearConstraint, Sense, VarId};
use crate::rational::{int, Rational};

pub use external::ExternalSolver;
pub use kernel::{propagate_bounds, Propagation, VarBounds};
pub use lp_format::{export_lp_text, lp_names, parse_external_solution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpVar {
    pub id: VarId,
    pub name: String,
    pub lower: i64,
    pub upper: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpObjective {
    pub sense: Sense,
    pub coeffs: Vec<(i64, VarId)>,
}

/// A bounded integer linear system. Rows should be `<=`; other relations are
/// normalized on entry to the kernel.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IpProblem {
    pub vars: Vec<IpVar>,
    pub rows: Vec<LinearConstraint>,
    pub objective: Option<IpObjective>,
}

impl IpProblem {
    pub fn feasibility(vars: Vec<IpVar>, rows: Vec<LinearConstraint>) -> Self {
        IpProblem {
            vars,
            rows,
            objective: None,
        }
    }

    /// Exact check of bounds and rows; every declared variable must be assigned.
    pub fn is_satisfied_by(&self, w: &Assignment) -> bool {
        let in_box = self.vars.iter().all(|v| match w.get(v.id) {
            Some(x) => v.lower <= x && x <= v.upper,
            None => false,
        });
        in_box && self.rows.iter().all(|r| r.satisfied_by(w) == Some(true))
    }

    pub fn objective_value(&self, w: &Assignment) -> Option<Rational> {
        self.objective.as_ref().map(|obj| {
            obj.coeffs.iter().fold(Rational::zero(), |acc, &(c, v)| {
                acc + int(c) * int(w.get(v).unwrap_or(0))
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnknownReason {
    NodeLimit,
    TimeLimit,
    /// Scaled coefficients or activities left the 128-bit range.
    Overflow,
    /// The external solver failed or returned something unusable.
    External(String),
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnknownReason::NodeLimit => f.write_str("node limit reached"),
            UnknownReason::TimeLimit => f.write_str("time limit reached"),
            UnknownReason::Overflow => f.write_str("arithmetic overflow in the IP kernel"),
            UnknownReason::External(msg) => write!(f, "external solver: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IpOutcome {
    Feasible {
        witness: Assignment,
        /// Proven optimal objective value when the problem has an objective.
        value: Option<Rational>,
    },
    Infeasible,
    Unknown(UnknownReason),
}

impl IpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, IpOutcome::Feasible { .. })
    }
}

/// Resource limits for one solve, shared by every oracle call made under it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn with_time_limit(limit: Duration) -> Self {
        Budget {
            max_nodes: None,
            deadline: Some(Instant::now() + limit),
        }
    }

    pub fn with_max_nodes(mut self, nodes: u64) -> Self {
        self.max_nodes = Some(nodes);
        self
    }

    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Solves with the built-in branch-and-bound kernel.
pub fn solve_ip(p: &IpProblem, budget: &Budget) -> IpOutcome {
    kernel::branch_and_bound(p, budget)
}

/// Which engine answers IP queries.
#[derive(Debug, Clone, Default)]
pub enum IpOracle {
    #[default]
    Builtin,
    External(ExternalSolver),
}

impl IpOracle {
    pub fn solve(&self, p: &IpProblem, budget: &Budget) -> IpOutcome {
        match self {
            IpOracle::Builtin => solve_ip(p, budget),
            IpOracle::External(solver) => solver.solve(p, budget),
        }
    }
}
