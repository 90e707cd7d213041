//! Expansion-based solving of quantified integer programs with polyhedral
//! uncertainty: counterexample-guided abstraction refinement over multi-games,
//! an integer-programming base oracle, binary-search optimization, instance
//! generators and a brute-force game-tree oracle.

pub mod cegar;
pub mod fuzz;
pub mod generators;
pub mod ip_oracle;
pub mod model;
pub mod optimize;
pub mod oracle_bruteforce;
pub mod parser;
pub mod rational;
pub mod stats;
pub mod wins;

#[cfg(test)]
mod fixtures;

pub use ip_oracle::{Budget, IpOutcome, IpProblem, IpVar, UnknownReason};
pub use model::{
    Assignment, Block, LinearConstraint, QipBuilder, QipInstance, Quantifier, Relation, Sense, VarId, Variable,
};
pub use rational::Rational;
