//! In-memory representation of a quantified integer program with polyhedral
//! uncertainty, together with normalization, instantiation and box arithmetic.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ip_oracle::{self, Budget, IpOutcome, IpProblem, IpVar};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Exists => "E",
            Quantifier::Forall => "A",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub lower: i64,
    pub upper: i64,
    pub quantifier: Quantifier,
    /// Index of the quantifier block the variable belongs to.
    pub block: usize,
    /// Copy lineage; `None` for variables of the original instance.
    pub annotation: Option<String>,
}

impl Variable {
    pub fn domain_size(&self) -> u64 {
        if self.upper < self.lower {
            0
        } else {
            (self.upper as i128 - self.lower as i128 + 1) as u64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

/// A linear row `sum(coef * var) rel rhs`; each variable appears at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    terms: Vec<(Rational, VarId)>,
    relation: Relation,
    rhs: Rational,
}

impl LinearConstraint {
    /// Builds a row, merging repeated variables into one term (first occurrence wins the slot).
    pub fn new(
        terms: impl IntoIterator<Item = (Rational, VarId)>,
        relation: Relation,
        rhs: Rational,
    ) -> Self {
        let mut merged: Vec<(Rational, VarId)> = Vec::new();
        let mut slot: HashMap<VarId, usize> = HashMap::new();
        for (coef, var) in terms {
            match slot.get(&var) {
                Some(&i) => merged[i].0 += coef,
                None => {
                    slot.insert(var, merged.len());
                    merged.push((coef, var));
                }
            }
        }
        LinearConstraint {
            terms: merged,
            relation,
            rhs,
        }
    }

    pub fn le(terms: impl IntoIterator<Item = (Rational, VarId)>, rhs: Rational) -> Self {
        Self::new(terms, Relation::Le, rhs)
    }

    /// Integer-coefficient shorthand, mostly for generators and tests.
    pub fn from_ints(terms: &[(i64, VarId)], relation: Relation, rhs: i64) -> Self {
        Self::new(terms.iter().map(|&(c, v)| (int(c), v)), relation, int(rhs))
    }

    pub fn terms(&self) -> &[(Rational, VarId)] {
        &self.terms
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.iter().map(|(_, v)| *v)
    }

    pub fn coefficient(&self, var: VarId) -> Option<&Rational> {
        self.terms.iter().find(|(_, v)| *v == var).map(|(c, _)| c)
    }

    /// Left-hand side value under `value`; every variable of the row must be assigned.
    pub fn activity(&self, value: impl Fn(VarId) -> i64) -> Rational {
        self.terms
            .iter()
            .fold(Rational::zero(), |acc, (c, v)| acc + c * int(value(*v)))
    }

    /// `None` when some variable of the row is unassigned.
    pub fn satisfied_by(&self, a: &Assignment) -> Option<bool> {
        let mut lhs = Rational::zero();
        for (c, v) in &self.terms {
            lhs += c * int(a.get(*v)?);
        }
        Some(self.relation.holds(&lhs, &self.rhs))
    }

    /// Removes assigned variables and moves their contribution to the right-hand side.
    pub fn instantiate(&self, a: &Assignment) -> LinearConstraint {
        let mut rhs = self.rhs.clone();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (c, v) in &self.terms {
            match a.get(*v) {
                Some(value) => rhs -= c * int(value),
                None => terms.push((c.clone(), *v)),
            }
        }
        LinearConstraint {
            terms,
            relation: self.relation,
            rhs,
        }
    }

    pub fn rename(&self, map: impl Fn(VarId) -> VarId) -> LinearConstraint {
        LinearConstraint {
            terms: self.terms.iter().map(|(c, v)| (c.clone(), map(*v))).collect(),
            relation: self.relation,
            rhs: self.rhs.clone(),
        }
    }

    fn negated_le(&self) -> LinearConstraint {
        LinearConstraint {
            terms: self.terms.iter().map(|(c, v)| (-c, *v)).collect(),
            relation: Relation::Le,
            rhs: -&self.rhs,
        }
    }

    /// Equivalent `<=` rows: EQ splits in two, GE flips sign.
    pub fn to_le(&self) -> Vec<LinearConstraint> {
        match self.relation {
            Relation::Le => vec![self.clone()],
            Relation::Ge => vec![self.negated_le()],
            Relation::Eq => {
                let mut le = self.clone();
                le.relation = Relation::Le;
                vec![le, self.negated_le()]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub quantifier: Quantifier,
    pub vars: Vec<VarId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub sense: Sense,
    pub coeffs: Vec<(i64, VarId)>,
}

impl Objective {
    pub fn value(&self, value: impl Fn(VarId) -> i64) -> i64 {
        self.coeffs.iter().map(|&(c, v)| c * value(v)).sum()
    }

    /// Objective row `c^T x <= bound`.
    pub fn row_le(&self, bound: i64) -> LinearConstraint {
        LinearConstraint::from_ints(&self.coeffs, Relation::Le, bound)
    }

    /// Objective row `c^T x >= bound`.
    pub fn row_ge(&self, bound: i64) -> LinearConstraint {
        LinearConstraint::from_ints(&self.coeffs, Relation::Ge, bound)
    }
}

/// Partial map from variable to integer value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(BTreeMap<VarId, i64>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: VarId) -> Option<i64> {
        self.0.get(&var).copied()
    }

    pub fn insert(&mut self, var: VarId, value: i64) {
        self.0.insert(var, value);
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.0.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, i64)> + '_ {
        self.0.iter().map(|(v, x)| (*v, *x))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.keys().copied()
    }

    pub fn restrict(&self, vars: &[VarId]) -> Assignment {
        vars.iter()
            .filter_map(|v| self.get(*v).map(|x| (*v, x)))
            .collect()
    }

    pub fn extend(&mut self, other: &Assignment) {
        for (v, x) in other.iter() {
            self.insert(v, x);
        }
    }

    /// Renders as `name=value` pairs in variable order.
    pub fn display_with<'a>(&'a self, name: impl Fn(VarId) -> &'a str) -> String {
        self.iter()
            .map(|(v, x)| format!("{}={}", name(v), x))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl FromIterator<(VarId, i64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarId, i64)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("row references unknown variable {0}")]
    UnknownVariable(VarId),
    #[error("objective coefficient on {0} repeated")]
    RepeatedObjectiveTerm(VarId),
}

/// A quantified integer program `Q1 X1 ... Qk Xk : A_E x <= b_E` with optional
/// universal system `A_A x <= b_A` and linear objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QipInstance {
    variables: Vec<Variable>,
    blocks: Vec<Block>,
    exist_system: Vec<LinearConstraint>,
    univ_system: Vec<LinearConstraint>,
    objective: Option<Objective>,
}

impl QipInstance {
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.index()]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn exist_system(&self) -> &[LinearConstraint] {
        &self.exist_system
    }

    pub fn univ_system(&self) -> &[LinearConstraint] {
        &self.univ_system
    }

    pub fn objective(&self) -> Option<&Objective> {
        self.objective.as_ref()
    }

    pub fn find(&self, name: &str) -> Option<VarId> {
        self.variables.iter().find(|v| v.name == name).map(|v| v.id)
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.variables[id.index()].name
    }

    /// Copy of the instance with one more existential row.
    pub fn with_exist_row(&self, row: LinearConstraint) -> QipInstance {
        let mut out = self.clone();
        out.exist_system.push(row);
        out
    }

    pub fn with_univ_system(&self, rows: Vec<LinearConstraint>) -> QipInstance {
        let mut out = self.clone();
        out.univ_system = rows;
        out
    }

    pub fn with_objective(&self, objective: Option<Objective>) -> QipInstance {
        let mut out = self.clone();
        out.objective = objective;
        out
    }

    /// Product of all domain sizes, saturating.
    pub fn box_cardinality(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.domain_size() as u128))
    }
}

/// Incremental constructor; consecutive variables with the same quantifier share a block.
#[derive(Debug, Default)]
pub struct QipBuilder {
    variables: Vec<Variable>,
    blocks: Vec<Block>,
    exist_system: Vec<LinearConstraint>,
    univ_system: Vec<LinearConstraint>,
    objective: Option<Objective>,
}

impl QipBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&mut self, name: impl Into<String>, quantifier: Quantifier, lower: i64, upper: i64) -> VarId {
        let id = VarId(self.variables.len() as u32);
        match self.blocks.last_mut() {
            Some(block) if block.quantifier == quantifier => block.vars.push(id),
            _ => self.blocks.push(Block {
                quantifier,
                vars: vec![id],
            }),
        }
        self.variables.push(Variable {
            id,
            name: name.into(),
            lower,
            upper,
            quantifier,
            block: self.blocks.len() - 1,
            annotation: None,
        });
        id
    }

    pub fn binary(&mut self, name: impl Into<String>, quantifier: Quantifier) -> VarId {
        self.var(name, quantifier, 0, 1)
    }

    pub fn set_bounds(&mut self, id: VarId, lower: i64, upper: i64) {
        let v = &mut self.variables[id.index()];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn exist_row(&mut self, row: LinearConstraint) -> &mut Self {
        self.exist_system.push(row);
        self
    }

    pub fn univ_row(&mut self, row: LinearConstraint) -> &mut Self {
        self.univ_system.push(row);
        self
    }

    pub fn objective(&mut self, sense: Sense, coeffs: Vec<(i64, VarId)>) -> &mut Self {
        self.objective = Some(Objective { sense, coeffs });
        self
    }

    pub fn build(self) -> Result<QipInstance, ModelError> {
        let mut seen = HashMap::new();
        for v in &self.variables {
            if seen.insert(v.name.clone(), v.id).is_some() {
                return Err(ModelError::DuplicateVariable(v.name.clone()));
            }
        }
        let n = self.variables.len();
        let known = |id: VarId| id.index() < n;
        for row in self.exist_system.iter().chain(&self.univ_system) {
            if let Some(bad) = row.vars().find(|v| !known(*v)) {
                return Err(ModelError::UnknownVariable(bad));
            }
        }
        if let Some(obj) = &self.objective {
            let mut used = std::collections::HashSet::new();
            for &(_, v) in &obj.coeffs {
                if !known(v) {
                    return Err(ModelError::UnknownVariable(v));
                }
                if !used.insert(v) {
                    return Err(ModelError::RepeatedObjectiveTerm(v));
                }
            }
        }
        Ok(QipInstance {
            variables: self.variables,
            blocks: self.blocks,
            exist_system: self.exist_system,
            univ_system: self.univ_system,
            objective: self.objective,
        })
    }
}

/// Growable variable registry: the instance's variables followed by annotated copies.
#[derive(Debug, Clone)]
pub struct VarTable {
    vars: Vec<Variable>,
}

impl VarTable {
    pub fn from_instance(inst: &QipInstance) -> Self {
        VarTable {
            vars: inst.variables.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn get(&self, id: VarId) -> &Variable {
        &self.vars[id.index()]
    }

    pub fn bounds(&self, id: VarId) -> (i64, i64) {
        let v = &self.vars[id.index()];
        (v.lower, v.upper)
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.vars[id.index()].name
    }

    /// Mints a fresh variable with the box, quantifier and block of `original`.
    pub fn copy_of(&mut self, original: VarId, annotation: &str) -> VarId {
        let base = self.vars[original.index()].clone();
        let id = VarId(self.vars.len() as u32);
        self.vars.push(Variable {
            id,
            name: format!("{}@{}", base.name, annotation),
            annotation: Some(annotation.to_string()),
            ..base
        });
        id
    }

    pub fn ip_var(&self, id: VarId) -> IpVar {
        let v = self.get(id);
        IpVar {
            id,
            name: v.name.clone(),
            lower: v.lower,
            upper: v.upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `lower > upper`.
    EmptyDomain { var: VarId },
    /// A universal row has a nonzero coefficient on an existential variable.
    UniversalRowTouchesExistential { row: usize, var: VarId },
    /// No point of the universal boxes satisfies the universal system.
    EmptyUncertaintySet,
    /// The uncertainty-set check could not be completed.
    UncertaintySetUndecided,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe(&self, inst: &QipInstance) -> Vec<String> {
        self.violations
            .iter()
            .map(|v| match v {
                Violation::EmptyDomain { var } => {
                    format!("variable {} has an empty domain", inst.name(*var))
                }
                Violation::UniversalRowTouchesExistential { row, var } => format!(
                    "uncertainty row {} uses existential variable {}",
                    row + 1,
                    inst.name(*var)
                ),
                Violation::EmptyUncertaintySet => "the uncertainty set is empty".to_string(),
                Violation::UncertaintySetUndecided => {
                    "could not decide whether the uncertainty set is empty".to_string()
                }
            })
            .collect()
    }
}

pub fn validate_instance(inst: &QipInstance) -> ValidationReport {
    let mut violations = Vec::new();
    for v in &inst.variables {
        if v.lower > v.upper {
            violations.push(Violation::EmptyDomain { var: v.id });
        }
    }
    for (i, row) in inst.univ_system.iter().enumerate() {
        for (c, v) in row.terms() {
            if !c.is_zero() && inst.variable(*v).quantifier == Quantifier::Exists {
                violations.push(Violation::UniversalRowTouchesExistential { row: i, var: *v });
            }
        }
    }
    if !inst.univ_system.is_empty() {
        let mut used: Vec<VarId> = inst.univ_system.iter().flat_map(|r| r.vars()).collect();
        used.sort();
        used.dedup();
        let boxes_ok = used.iter().all(|v| {
            let var = inst.variable(*v);
            var.lower <= var.upper
        });
        if boxes_ok {
            let problem = IpProblem {
                vars: used
                    .iter()
                    .map(|v| {
                        let var = inst.variable(*v);
                        IpVar {
                            id: *v,
                            name: var.name.clone(),
                            lower: var.lower,
                            upper: var.upper,
                        }
                    })
                    .collect(),
                rows: inst.univ_system.iter().flat_map(|r| r.to_le()).collect(),
                objective: None,
            };
            match ip_oracle::solve_ip(&problem, &Budget::unlimited()) {
                IpOutcome::Feasible { .. } => {}
                IpOutcome::Infeasible => violations.push(Violation::EmptyUncertaintySet),
                IpOutcome::Unknown(_) => violations.push(Violation::UncertaintySetUndecided),
            }
        }
    }
    ValidationReport { violations }
}

/// Rewrites every row of both systems into `<=` form.
pub fn normalize(inst: &QipInstance) -> QipInstance {
    let mut out = inst.clone();
    out.exist_system = inst.exist_system.iter().flat_map(|r| r.to_le()).collect();
    out.univ_system = inst.univ_system.iter().flat_map(|r| r.to_le()).collect();
    out
}

/// `A_(-X) x_(-X) <= b_(X=tau)`: assigned variables leave the rows and shift the
/// right-hand sides. Rows left without terms stay as numeric facts.
pub fn instantiate(system: &[LinearConstraint], a: &Assignment) -> Vec<LinearConstraint> {
    system.iter().map(|r| r.instantiate(a)).collect()
}

/// Minimum and maximum of `c^T x` over the variable boxes, ignoring all rows.
pub fn objective_bounds(inst: &QipInstance) -> (i64, i64) {
    let Some(obj) = &inst.objective else {
        return (0, 0);
    };
    let mut lb = 0i64;
    let mut ub = 0i64;
    for &(c, v) in &obj.coeffs {
        let var = inst.variable(v);
        let (a, b) = (c * var.lower, c * var.upper);
        lb += a.min(b);
        ub += a.max(b);
    }
    (lb, ub)
}

/// Smallest activity of `row` over the given boxes.
pub fn min_activity(row: &LinearConstraint, bounds: impl Fn(VarId) -> (i64, i64)) -> Rational {
    row.terms().iter().fold(Rational::zero(), |acc, (c, v)| {
        let (lo, hi) = bounds(*v);
        acc + if c.is_negative() {
            c * int(hi)
        } else {
            c * int(lo)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_one;
    use crate::rational::ratio;

    #[test]
    fn builder_merges_consecutive_blocks() {
        let mut b = QipBuilder::new();
        b.binary("a", Quantifier::Exists);
        b.binary("b", Quantifier::Exists);
        b.binary("c", Quantifier::Forall);
        b.binary("d", Quantifier::Exists);
        let inst = b.build().unwrap();
        assert_eq!(inst.blocks().len(), 3);
        assert_eq!(inst.blocks()[0].vars.len(), 2);
        assert!(inst
            .blocks()
            .windows(2)
            .all(|w| w[0].quantifier != w[1].quantifier));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut b = QipBuilder::new();
        b.binary("a", Quantifier::Exists);
        b.binary("a", Quantifier::Forall);
        assert_eq!(b.build(), Err(ModelError::DuplicateVariable("a".into())));
    }

    #[test]
    fn example_one_is_admissible() {
        assert!(validate_instance(&example_one()).is_admissible());
    }

    #[test]
    fn universal_row_on_existential_is_reported() {
        let mut b = QipBuilder::new();
        let _x1 = b.binary("x1", Quantifier::Exists);
        let x2 = b.binary("x2", Quantifier::Forall);
        let x3 = b.binary("x3", Quantifier::Exists);
        b.univ_row(LinearConstraint::from_ints(&[(1, x2), (1, x3)], Relation::Le, 1));
        let report = validate_instance(&b.build().unwrap());
        assert!(report
            .violations
            .contains(&Violation::UniversalRowTouchesExistential { row: 0, var: x3 }));
    }

    #[test]
    fn contradictory_uncertainty_set_is_reported() {
        let mut b = QipBuilder::new();
        b.binary("x", Quantifier::Exists);
        let z = b.binary("z", Quantifier::Forall);
        b.univ_row(LinearConstraint::from_ints(&[(1, z)], Relation::Ge, 1));
        b.univ_row(LinearConstraint::from_ints(&[(1, z)], Relation::Le, 0));
        let report = validate_instance(&b.build().unwrap());
        assert_eq!(report.violations, vec![Violation::EmptyUncertaintySet]);
    }

    #[test]
    fn empty_domain_is_reported() {
        let mut b = QipBuilder::new();
        let x = b.binary("x", Quantifier::Exists);
        b.set_bounds(x, 2, 1);
        let report = validate_instance(&b.build().unwrap());
        assert_eq!(report.violations, vec![Violation::EmptyDomain { var: x }]);
    }

    #[test]
    fn normalize_splits_equalities_and_flips_ge() {
        let inst = example_one();
        let norm = normalize(&inst);
        assert_eq!(norm.exist_system().len(), 5);
        assert!(norm
            .exist_system()
            .iter()
            .all(|r| r.relation() == Relation::Le));
        let (x1, x2, x3, x5) = (VarId(0), VarId(1), VarId(2), VarId(4));
        assert_eq!(
            norm.exist_system()[1],
            LinearConstraint::from_ints(&[(1, x1), (-1, x2), (1, x3), (-1, x5)], Relation::Le, 1)
        );
        assert_eq!(
            norm.exist_system()[2],
            LinearConstraint::from_ints(&[(-1, x1), (1, x2), (-1, x3), (1, x5)], Relation::Le, -1)
        );
        let ge = LinearConstraint::from_ints(&[(1, x1), (1, x2), (1, x3)], Relation::Ge, 1);
        assert_eq!(
            ge.to_le(),
            vec![LinearConstraint::from_ints(
                &[(-1, x1), (-1, x2), (-1, x3)],
                Relation::Le,
                -1
            )]
        );
        let le_only = normalize(&norm);
        assert_eq!(le_only, norm);
    }

    #[test]
    fn instantiate_example_one_at_x1() {
        let inst = example_one();
        let tau: Assignment = [(VarId(0), 1)].into_iter().collect();
        let rows = instantiate(inst.exist_system(), &tau);
        let rhs: Vec<_> = rows.iter().map(|r| r.rhs().clone()).collect();
        assert_eq!(rhs, vec![int(2), int(0), int(2), int(2)]);
        assert!(rows.iter().all(|r| r.coefficient(VarId(0)).is_none()));
    }

    #[test]
    fn instantiate_zero_contribution_and_full_fact() {
        let (x1, x3) = (VarId(0), VarId(1));
        let row = LinearConstraint::from_ints(&[(2, x1), (1, x3)], Relation::Le, 4);
        let a: Assignment = [(x1, 0)].into_iter().collect();
        assert_eq!(
            row.instantiate(&a),
            LinearConstraint::from_ints(&[(1, x3)], Relation::Le, 4)
        );
        let row = LinearConstraint::from_ints(&[(1, x1), (1, x3)], Relation::Le, 1);
        let a: Assignment = [(x1, 1), (x3, 1)].into_iter().collect();
        let fact = row.instantiate(&a);
        assert!(fact.terms().is_empty());
        assert_eq!(fact.rhs(), &int(-1));
        assert_eq!(fact.satisfied_by(&Assignment::new()), Some(false));
    }

    #[test]
    fn objective_bounds_of_example_one() {
        // Upper bound 5 = 0 + 2 + 0 + 1 + 2; the enumeration below agrees.
        assert_eq!(objective_bounds(&example_one()), (-5, 5));
        // Oracle: enumerate all 48 box points.
        let inst = example_one();
        let obj = inst.objective().unwrap();
        let (mut lo, mut hi) = (i64::MAX, i64::MIN);
        for x1 in 0..=2 {
            for rest in 0..16 {
                let vals = [x1, rest & 1, (rest >> 1) & 1, (rest >> 2) & 1, (rest >> 3) & 1];
                let v = obj.value(|id| vals[id.index()]);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        assert_eq!((lo, hi), (-5, 5));
    }

    #[test]
    fn objective_bounds_trivial_cases() {
        let mut b = QipBuilder::new();
        let x = b.var("x", Quantifier::Exists, -2, 2);
        b.objective(Sense::Min, vec![(3, x)]);
        assert_eq!(objective_bounds(&b.build().unwrap()), (-6, 6));
        let mut b = QipBuilder::new();
        let x = b.var("x", Quantifier::Exists, -2, 2);
        b.objective(Sense::Min, vec![(0, x)]);
        assert_eq!(objective_bounds(&b.build().unwrap()), (0, 0));
    }

    #[test]
    fn constraint_merges_repeated_variables() {
        let x = VarId(0);
        let row = LinearConstraint::new(
            [(ratio(1, 2), x), (ratio(1, 2), x)],
            Relation::Le,
            int(1),
        );
        assert_eq!(row.terms(), &[(int(1), x)]);
    }
}

