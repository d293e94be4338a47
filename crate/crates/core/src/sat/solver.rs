//! DPLL with two-watched-literal unit propagation and chronological
//! backtracking.
//!
//! Branching picks the variable occurring most often in the shortest
//! not-yet-satisfied clauses (ties to the lowest index) and tries the polarity
//! that satisfies more of those clauses first (ties to `false`). Search is
//! fully deterministic.

use crate::admissibility::Prediction;
use crate::requirements::{Literal, RequirementSet};

/// Literal code: `2 * var + (negative as u32)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Lit(u32);

impl Lit {
    #[inline]
    pub(crate) fn new(var: usize, positive: bool) -> Self {
        Lit((var as u32) << 1 | u32::from(!positive))
    }

    #[inline]
    pub(crate) fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub(crate) fn positive(self) -> bool {
        self.0 & 1 == 0
    }

    #[inline]
    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl From<Literal> for Lit {
    fn from(l: Literal) -> Self {
        Lit::new(l.label, l.positive)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Prediction),
    Unsat,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Prediction> {
        match self {
            SolveResult::Sat(m) => Some(m),
            SolveResult::Unsat => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Level {
    trail_start: usize,
    decision: Lit,
    second_branch: bool,
}

/// Reusable solver over a fixed clause database. Each `solve` call starts
/// from an empty assignment, so assumptions do not leak between calls.
#[derive(Debug, Clone)]
pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    units: Vec<Lit>,
    has_empty: bool,
    watches: Vec<Vec<usize>>,
    value: Vec<Option<bool>>,
    trail: Vec<Lit>,
    levels: Vec<Level>,
    qhead: usize,
    decisions: u64,
}

impl Solver {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            clauses: Vec::new(),
            units: Vec::new(),
            has_empty: false,
            watches: vec![Vec::new(); 2 * num_vars],
            value: vec![None; num_vars],
            trail: Vec::with_capacity(num_vars),
            levels: Vec::new(),
            qhead: 0,
            decisions: 0,
        }
    }

    pub fn from_requirements(rs: &RequirementSet) -> Self {
        let mut solver = Self::new(rs.num_labels());
        for clause in rs.clauses() {
            solver.add_clause(clause.literals());
        }
        solver
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len() + self.units.len() + usize::from(self.has_empty)
    }

    /// Decisions taken over the solver's lifetime.
    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    pub fn add_clause(&mut self, literals: &[Literal]) {
        let mut lits: Vec<Lit> = literals.iter().map(|&l| Lit::from(l)).collect();
        for l in &lits {
            assert!(l.var() < self.num_vars, "literal outside solver range");
        }
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return; // tautology
        }
        match lits.len() {
            0 => self.has_empty = true,
            1 => self.units.push(lits[0]),
            _ => {
                let index = self.clauses.len();
                self.watches[lits[0].code()].push(index);
                self.watches[lits[1].code()].push(index);
                self.clauses.push(lits);
            }
        }
    }

    #[inline]
    fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.value[lit.var()].map(|v| v == lit.positive())
    }

    /// Assigns `lit` true; returns false on conflict with the current value.
    fn enqueue(&mut self, lit: Lit) -> bool {
        match self.lit_value(lit) {
            Some(v) => v,
            None => {
                self.value[lit.var()] = Some(lit.positive());
                self.trail.push(lit);
                true
            }
        }
    }

    /// Returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let falsified = !self.trail[self.qhead];
            self.qhead += 1;
            let mut watchers = std::mem::take(&mut self.watches[falsified.code()]);
            let mut keep = 0;
            let mut conflict = false;
            let mut i = 0;
            while i < watchers.len() {
                let ci = watchers[i];
                i += 1;
                if conflict {
                    watchers[keep] = ci;
                    keep += 1;
                    continue;
                }
                let clause = &mut self.clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                if self.value[other.var()] == Some(other.positive()) {
                    watchers[keep] = ci;
                    keep += 1;
                    continue;
                }
                let replacement = (2..clause.len()).find(|&k| {
                    let l = clause[k];
                    self.value[l.var()] != Some(!l.positive())
                });
                if let Some(k) = replacement {
                    clause.swap(1, k);
                    let new_watch = clause[1];
                    self.watches[new_watch.code()].push(ci);
                    continue;
                }
                watchers[keep] = ci;
                keep += 1;
                if !self.enqueue(other) {
                    conflict = true;
                }
            }
            watchers.truncate(keep);
            self.watches[falsified.code()] = watchers;
            if conflict {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, trail_len: usize) {
        for lit in self.trail.drain(trail_len..) {
            self.value[lit.var()] = None;
        }
        self.qhead = self.qhead.min(trail_len);
    }

    fn reset(&mut self) {
        self.undo_to(0);
        self.levels.clear();
        self.qhead = 0;
    }

    /// Branching literal, or `None` when every clause is satisfied.
    fn pick_branch(&self) -> Option<Lit> {
        let mut shortest = usize::MAX;
        let mut counts = vec![[0u32; 2]; self.num_vars];
        for clause in &self.clauses {
            if clause.iter().any(|&l| self.lit_value(l) == Some(true)) {
                continue;
            }
            let open = clause.iter().filter(|&&l| self.lit_value(l).is_none()).count();
            if open < shortest {
                shortest = open;
                counts.iter_mut().for_each(|c| *c = [0, 0]);
            }
            if open == shortest {
                for &l in clause.iter().filter(|&&l| self.lit_value(l).is_none()) {
                    counts[l.var()][usize::from(l.positive())] += 1;
                }
            }
        }
        if shortest == usize::MAX {
            return None;
        }
        let (var, c) = counts
            .iter()
            .enumerate()
            .filter(|(v, _)| self.value[*v].is_none())
            .max_by(|(va, a), (vb, b)| (a[0] + a[1]).cmp(&(b[0] + b[1])).then(vb.cmp(va)))?;
        Some(Lit::new(var, c[1] > c[0]))
    }

    fn model(&self) -> Prediction {
        Prediction::new(self.value.iter().map(|v| v.unwrap_or(false)).collect())
    }

    /// Searches for a model extending `assumptions`.
    pub fn solve(&mut self, assumptions: &[Literal]) -> SolveResult {
        self.reset();
        let result = self.search(assumptions);
        self.reset();
        result
    }

    fn search(&mut self, assumptions: &[Literal]) -> SolveResult {
        if self.has_empty {
            return SolveResult::Unsat;
        }
        let roots: Vec<Lit> = self.units.iter().copied().chain(assumptions.iter().map(|&l| Lit::from(l))).collect();
        for lit in roots {
            assert!(lit.var() < self.num_vars, "assumption outside solver range");
            if !self.enqueue(lit) {
                return SolveResult::Unsat;
            }
        }
        loop {
            if self.propagate() {
                match self.pick_branch() {
                    None => return SolveResult::Sat(self.model()),
                    Some(decision) => {
                        self.decisions += 1;
                        self.levels.push(Level { trail_start: self.trail.len(), decision, second_branch: false });
                        self.enqueue(decision);
                    }
                }
                continue;
            }
            // conflict: flip the deepest decision whose other branch is untried
            loop {
                let Some(level) = self.levels.pop() else {
                    return SolveResult::Unsat;
                };
                self.undo_to(level.trail_start);
                if !level.second_branch {
                    let flipped = !level.decision;
                    self.levels.push(Level { trail_start: self.trail.len(), decision: flipped, second_branch: true });
                    self.enqueue(flipped);
                    break;
                }
            }
        }
    }
}
