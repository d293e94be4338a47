//! Propositional reasoning over requirement sets: satisfiability,
//! entailment, redundancy and exact model counting.

mod count;
mod solver;

use rayon::prelude::*;

pub use count::{count_models, CountStats, ModelCount, ModelCounter};
pub use solver::{SolveResult, Solver};

use crate::requirements::{Clause, Literal, RequirementSet};

/// Satisfiability of `rs` together with unit `assumptions`.
pub fn solve(rs: &RequirementSet, assumptions: &[Literal]) -> SolveResult {
    Solver::from_requirements(rs).solve(assumptions)
}

/// `rs ⊨ c`, i.e. `rs ∧ ¬c` is unsatisfiable.
pub fn entails(rs: &RequirementSet, c: &Clause) -> bool {
    let negated: Vec<Literal> = c.literals().iter().map(|l| l.negated()).collect();
    !solve(rs, &negated).is_sat()
}

/// Indices of clauses entailed by the remaining clauses, ascending.
pub fn find_redundant(rs: &RequirementSet) -> Vec<usize> {
    (0..rs.len()).into_par_iter().filter(|&i| entails(&rs.without(i), &rs.clauses()[i])).collect()
}
