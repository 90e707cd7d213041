//! Counterexample-guided abstraction refinement over multi-games.
//!
//! A multi-game `Q X : {Phi_1 .. Phi_l}` is won by a move of `X` that wins
//! every subgame. The loop keeps an abstraction with the same outer block
//! but only some (expanded) subgames, finds a move for it, and looks for a
//! countermove in the real subgames. A countermove `mu` refines the
//! abstraction with a copy of the subgame instantiated at `mu`.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::ip_oracle::{Budget, IpOracle, IpOutcome, IpProblem, UnknownReason};
use crate::model::{normalize, Assignment, Block, LinearConstraint, QipInstance, Quantifier, VarId, VarTable};
use crate::stats::SolveStats;
use crate::wins::{game_rows, wins, GameRow, ViolationRule, WinsContext};

/// Remaining game after some outer moves: quantifier blocks still to play,
/// the existential rows and the applicable uncertainty rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgame {
    pub prefix: Vec<Block>,
    pub system: Vec<GameRow>,
    pub univ: Vec<LinearConstraint>,
    pub lineage: String,
}

impl Subgame {
    pub fn is_quantifier_free(&self) -> bool {
        self.prefix.is_empty()
    }

    pub fn instantiate(&self, a: &Assignment) -> Subgame {
        Subgame {
            prefix: self.prefix.clone(),
            system: self.system.iter().map(|g| g.instantiate(a)).collect(),
            univ: self.univ.iter().map(|r| r.instantiate(a)).collect(),
            lineage: self.lineage.clone(),
        }
    }

    /// Existential player wins a quantifier-free subgame whose variables are all assigned.
    fn facts_hold(&self) -> bool {
        let empty = Assignment::new();
        self.system.iter().all(|g| g.row.satisfied_by(&empty) == Some(true))
    }

    fn variables(&self) -> impl Iterator<Item = VarId> + '_ {
        self.prefix.iter().flat_map(|b| b.vars.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGame {
    pub quantifier: Quantifier,
    pub outer: Vec<VarId>,
    /// Restricted-domain rows for a universal outer block (may use auxiliary variables).
    pub outer_univ: Vec<LinearConstraint>,
    pub subgames: Vec<Subgame>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirstMove {
    /// Lower bounds of the outer block.
    Bounds,
    /// At the root existential block, a solution of all rows ignoring quantification.
    #[default]
    Relax,
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub first_move: FirstMove,
    pub violation_rule: ViolationRule,
    pub oracle: IpOracle,
    pub time_limit: Option<Duration>,
    /// Node limit for each individual IP call.
    pub max_nodes: Option<u64>,
}

impl SolveOptions {
    pub fn budget(&self) -> Budget {
        let mut b = match self.time_limit {
            Some(t) => Budget::with_time_limit(t),
            None => Budget::unlimited(),
        };
        b.max_nodes = self.max_nodes;
        b
    }
}

/// Restriction of `full` to the original outer variables; copies are dropped.
pub fn extract(full: &Assignment, outer: &[VarId]) -> Assignment {
    full.restrict(outer)
}

/// Rows describing `D_j(prefix)` for one universal block, with every other
/// universal variable replaced by a fresh auxiliary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainConstraints {
    pub rows: Vec<LinearConstraint>,
    pub aux: Vec<VarId>,
}

fn domain_rows(rows: &[LinearConstraint], keep: &[VarId], vt: &mut VarTable, tag: &str) -> DomainConstraints {
    let mut aux: HashMap<VarId, VarId> = HashMap::new();
    let mut order = Vec::new();
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        for v in row.vars() {
            if !keep.contains(&v) && !aux.contains_key(&v) {
                let a = vt.copy_of(v, tag);
                aux.insert(v, a);
                order.push(a);
            }
        }
        out.push(row.rename(|v| aux.get(&v).copied().unwrap_or(v)));
    }
    DomainConstraints { rows: out, aux: order }
}

/// `D_j(prefix)` for block `block` of `inst`: the uncertainty rows with the
/// earlier universal values substituted, over the block's variables plus
/// auxiliaries standing for all later universal variables.
pub fn universal_domain_constraints(
    inst: &QipInstance,
    prefix: &Assignment,
    block: usize,
    vt: &mut VarTable,
) -> DomainConstraints {
    let rows: Vec<LinearConstraint> = inst
        .univ_system()
        .iter()
        .flat_map(|r| r.to_le())
        .map(|r| r.instantiate(prefix))
        .collect();
    domain_rows(&rows, &inst.blocks()[block].vars, vt, &format!("ext{block}"))
}

pub struct Engine {
    pub vt: VarTable,
    pub options: SolveOptions,
    pub budget: Budget,
    pub stats: SolveStats,
    copies: usize,
    relax_root: Option<(Vec<VarId>, IpProblem)>,
}

impl Engine {
    pub fn new(vt: VarTable, options: SolveOptions) -> Self {
        let budget = options.budget();
        Engine {
            vt,
            options,
            budget,
            stats: SolveStats::default(),
            copies: 0,
            relax_root: None,
        }
    }

    fn ctx_call(
        &mut self,
        q: Quantifier,
        outer: &[VarId],
        univ: &[LinearConstraint],
        subgames: &[Vec<GameRow>],
    ) -> Result<Option<Assignment>, UnknownReason> {
        self.stats.ip_calls += 1;
        let ctx = WinsContext {
            vt: &self.vt,
            oracle: &self.options.oracle,
            budget: &self.budget,
            rule: self.options.violation_rule,
        };
        wins(q, outer, univ, subgames, &ctx)
    }

    fn lower_bounds(&self, outer: &[VarId]) -> Assignment {
        outer.iter().map(|&v| (v, self.vt.bounds(v).0)).collect()
    }

    /// Move for the empty abstraction.
    fn first_move(&mut self, g: &MultiGame) -> Result<Option<Assignment>, UnknownReason> {
        if let Some((outer, relax)) = self.relax_root.take() {
            if outer == g.outer {
                self.stats.ip_calls += 1;
                match self.options.oracle.solve(&relax, &self.budget) {
                    IpOutcome::Feasible { witness, .. } => return Ok(Some(witness.restrict(&g.outer))),
                    IpOutcome::Infeasible => {}
                    IpOutcome::Unknown(r) => return Err(r),
                }
            }
        }
        match g.quantifier {
            Quantifier::Forall if !g.outer_univ.is_empty() => self.ctx_call(Quantifier::Forall, &g.outer, &g.outer_univ, &[]),
            _ => Ok(Some(self.lower_bounds(&g.outer))),
        }
    }

    /// The game `Qbar Y : {rest}` in which a countermove to the current move is sought.
    pub fn countermove_game(&mut self, inst: &Subgame) -> MultiGame {
        let y = &inst.prefix[0];
        let outer_univ = match y.quantifier {
            Quantifier::Forall => domain_rows(&inst.univ, &y.vars, &mut self.vt, "ext").rows,
            Quantifier::Exists => Vec::new(),
        };
        MultiGame {
            quantifier: y.quantifier,
            outer: y.vars.clone(),
            outer_univ,
            subgames: vec![Subgame {
                prefix: inst.prefix[1..].to_vec(),
                system: inst.system.clone(),
                univ: inst.univ.clone(),
                lineage: inst.lineage.clone(),
            }],
        }
    }

    /// Adds the subgame `phi` expanded at countermove `mu` to `alpha`.
    pub fn refine(&mut self, alpha: &mut MultiGame, phi: &Subgame, mu: &Assignment) {
        if phi.is_quantifier_free() {
            alpha.subgames.push(phi.clone());
            return;
        }
        self.copies += 1;
        let tag = format!(
            "({})#{}",
            mu.display_with(|v| self.vt.name(v)).replace(' ', ""),
            self.copies
        );
        let lineage = format!("{}/{}", phi.lineage, tag);
        if phi.prefix.len() == 1 {
            alpha.subgames.push(Subgame {
                prefix: Vec::new(),
                system: phi.system.iter().map(|g| g.instantiate(mu)).collect(),
                univ: Vec::new(),
                lineage,
            });
            return;
        }
        let mut map: HashMap<VarId, VarId> = HashMap::new();
        for v in phi.prefix[1..].iter().flat_map(|b| b.vars.iter()) {
            let c = self.vt.copy_of(*v, &tag);
            map.insert(*v, c);
        }
        let rename = |v: VarId| map.get(&v).copied().unwrap_or(v);
        let prefix: Vec<Block> = phi.prefix[2..]
            .iter()
            .map(|b| Block {
                quantifier: b.quantifier,
                vars: b.vars.iter().map(|v| rename(*v)).collect(),
            })
            .collect();
        let system = phi.system.iter().map(|g| g.instantiate(mu).rename(rename)).collect();
        let univ: Vec<LinearConstraint> = phi.univ.iter().map(|r| r.instantiate(mu).rename(rename)).collect();
        let z = &phi.prefix[1];
        let z_copies: Vec<VarId> = z.vars.iter().map(|v| rename(*v)).collect();
        alpha.outer.extend(z_copies);
        if z.quantifier == Quantifier::Forall && !univ.is_empty() {
            let keep = alpha.outer.clone();
            alpha.outer_univ.extend(domain_rows(&univ, &keep, &mut self.vt, "ext").rows);
        }
        alpha.subgames.push(Subgame {
            prefix,
            system,
            univ,
            lineage,
        });
    }

    pub fn solve_multigame(&mut self, g: &MultiGame) -> Result<Option<Assignment>, UnknownReason> {
        self.solve_at(g, 0)
    }

    fn solve_at(&mut self, g: &MultiGame, depth: usize) -> Result<Option<Assignment>, UnknownReason> {
        self.stats.enter(depth);
        if self.budget.expired() {
            return Err(UnknownReason::TimeLimit);
        }
        if g.subgames.iter().all(Subgame::is_quantifier_free) {
            let systems: Vec<Vec<GameRow>> = g.subgames.iter().map(|s| s.system.clone()).collect();
            return self.ctx_call(g.quantifier, &g.outer, &g.outer_univ, &systems);
        }
        let mut alpha = MultiGame {
            quantifier: g.quantifier,
            outer: g.outer.clone(),
            outer_univ: g.outer_univ.clone(),
            subgames: Vec::new(),
        };
        loop {
            self.stats.iteration(depth);
            if self.budget.expired() {
                return Err(UnknownReason::TimeLimit);
            }
            let full = if alpha.subgames.is_empty() {
                self.first_move(g)?
            } else {
                self.solve_at(&alpha, depth + 1)?
            };
            let Some(full) = full else {
                return Ok(None);
            };
            let tau = extract(&full, &g.outer);
            let mut counter: Option<(usize, Assignment)> = None;
            for (l, phi) in g.subgames.iter().enumerate() {
                let inst = phi.instantiate(&tau);
                if inst.is_quantifier_free() {
                    let q_wins = match g.quantifier {
                        Quantifier::Exists => inst.facts_hold(),
                        Quantifier::Forall => !inst.facts_hold(),
                    };
                    if !q_wins {
                        counter = Some((l, Assignment::new()));
                        break;
                    }
                    continue;
                }
                let h = self.countermove_game(&inst);
                if let Some(mu) = self.solve_at(&h, depth + 1)? {
                    counter = Some((l, mu));
                    break;
                }
            }
            match counter {
                None => return Ok(Some(tau)),
                Some((l, mu)) => {
                    self.refine(&mut alpha, &g.subgames[l], &mu);
                    self.stats.refinement(depth);
                }
            }
        }
    }
}

/// The instance as a multi-game over its first block with a single subgame.
pub fn root_game(inst: &QipInstance, vt: &mut VarTable) -> MultiGame {
    let norm = normalize(inst);
    let system = game_rows(norm.exist_system(), vt);
    let univ = norm.univ_system().to_vec();
    let (quantifier, outer, rest) = match inst.blocks().split_first() {
        Some((first, rest)) => (first.quantifier, first.vars.clone(), rest.to_vec()),
        None => (Quantifier::Exists, Vec::new(), Vec::new()),
    };
    let outer_univ = match quantifier {
        Quantifier::Forall => domain_rows(&univ, &outer, vt, "ext").rows,
        Quantifier::Exists => Vec::new(),
    };
    let keep_univ = rest.iter().any(|b| b.quantifier == Quantifier::Forall);
    MultiGame {
        quantifier,
        outer,
        outer_univ,
        subgames: vec![Subgame {
            prefix: rest,
            system,
            univ: if keep_univ { univ } else { Vec::new() },
            lineage: String::new(),
        }],
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// The existential player wins; the move is given when the first block is existential.
    Feasible { first_move: Option<Assignment> },
    Infeasible,
    Unknown(UnknownReason),
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub outcome: SolveOutcome,
    pub stats: SolveStats,
}

/// Decides whether the existential player wins `inst`.
pub fn solve_qip(inst: &QipInstance, options: &SolveOptions) -> SolveReport {
    let start = Instant::now();
    let mut vt = VarTable::from_instance(inst);
    let game = root_game(inst, &mut vt);
    let mut engine = Engine::new(vt, options.clone());
    if options.first_move == FirstMove::Relax && game.quantifier == Quantifier::Exists && !game.outer.is_empty() {
        let norm = normalize(inst);
        let vars = inst.variables().iter().map(|v| engine.vt.ip_var(v.id)).collect();
        let rows = norm.exist_system().iter().chain(norm.univ_system()).cloned().collect();
        engine.relax_root = Some((game.outer.clone(), IpProblem::feasibility(vars, rows)));
    }
    let result = engine.solve_multigame(&game);
    let outcome = match (result, game.quantifier) {
        (Err(r), _) => SolveOutcome::Unknown(r),
        (Ok(Some(tau)), Quantifier::Exists) => SolveOutcome::Feasible { first_move: Some(tau) },
        (Ok(None), Quantifier::Exists) => SolveOutcome::Infeasible,
        (Ok(Some(_)), Quantifier::Forall) => SolveOutcome::Infeasible,
        (Ok(None), Quantifier::Forall) => SolveOutcome::Feasible { first_move: None },
    };
    let mut stats = engine.stats;
    stats.wall_ms = start.elapsed().as_millis() as u64;
    stats.outcome = match &outcome {
        SolveOutcome::Feasible { .. } => "feasible",
        SolveOutcome::Infeasible => "infeasible",
        SolveOutcome::Unknown(_) => "unknown",
    }
    .to_string();
    SolveReport { outcome, stats }
}

/// Variables appearing in the prefix of any subgame of `g`.
pub fn inner_variables(g: &MultiGame) -> Vec<VarId> {
    g.subgames.iter().flat_map(|s| s.variables()).collect()
}
