//! Exact model counting: DPLL over residual formulas with unit propagation,
//! connected-component decomposition and a component cache.
//!
//! Every residual formula is kept as a canonical list of clauses (literals
//! sorted, clauses sorted), which doubles as the cache key. The variables of
//! a component are exactly those occurring in its clauses; variables that
//! drop out of the formula without being assigned contribute a factor of 2.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::solver::Lit;
use crate::requirements::RequirementSet;

type Formula = Vec<Vec<Lit>>;

/// Exact number of satisfying total assignments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ModelCount(pub BigUint);

impl From<ModelCount> for String {
    fn from(c: ModelCount) -> String {
        c.0.to_string()
    }
}

impl TryFrom<String> for ModelCount {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse::<BigUint>().map(ModelCount).map_err(|e| e.to_string())
    }
}

impl std::fmt::Display for ModelCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for ModelCount {
    fn from(v: u64) -> Self {
        ModelCount(BigUint::from(v))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountStats {
    pub decisions: u64,
    pub cache_hits: u64,
    pub cache_entries: usize,
    pub components: u64,
}

#[derive(Debug, Default)]
pub struct ModelCounter {
    cache: HashMap<Formula, BigUint>,
    stats: CountStats,
}

fn pow2(k: usize) -> BigUint {
    BigUint::one() << k
}

fn canonical(mut formula: Formula) -> Formula {
    for c in &mut formula {
        c.sort_unstable();
    }
    formula.sort_unstable();
    formula.dedup();
    formula
}

fn vars_of(formula: &Formula) -> Vec<usize> {
    let mut vars: Vec<usize> = formula.iter().flatten().map(|l| l.var()).collect();
    vars.sort_unstable();
    vars.dedup();
    vars
}

/// Conditions `formula` on `lit` and closes under unit propagation.
///
/// Returns the residual formula and the number of variables assigned along
/// the way (including `lit`), or `None` on conflict. Assigned variables no
/// longer occur in the residual.
fn propagate(formula: &Formula, lit: Lit) -> Option<(Formula, usize)> {
    let mut assigned = vec![lit];
    let mut current = formula.clone();
    let mut i = 0;
    while i < assigned.len() {
        let l = assigned[i];
        i += 1;
        let mut next = Vec::with_capacity(current.len());
        for clause in current {
            if clause.contains(&l) {
                continue;
            }
            let reduced: Vec<Lit> = clause.into_iter().filter(|&x| x != !l).collect();
            match reduced.len() {
                0 => return None,
                1 => {
                    let unit = reduced[0];
                    if assigned.contains(&!unit) {
                        return None;
                    }
                    if !assigned.contains(&unit) {
                        assigned.push(unit);
                    }
                }
                _ => next.push(reduced),
            }
        }
        current = next;
    }
    Some((current, assigned.len()))
}

/// Splits a formula into variable-disjoint components.
fn components(formula: Formula) -> Vec<Formula> {
    let vars = vars_of(&formula);
    let slot: HashMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for clause in &formula {
        let first = slot[&clause[0].var()];
        for l in &clause[1..] {
            let (a, b) = (find(&mut parent, first), find(&mut parent, slot[&l.var()]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Formula> = Vec::new();
    let mut group_of_root: HashMap<usize, usize> = HashMap::new();
    for clause in formula {
        let root = find(&mut parent, slot[&clause[0].var()]);
        let g = *group_of_root.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(clause);
    }
    groups.into_iter().map(canonical).collect()
}

impl ModelCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> CountStats {
        CountStats { cache_entries: self.cache.len(), ..self.stats }
    }

    /// Counts total assignments over `rs.num_labels()` labels.
    pub fn count(&mut self, rs: &RequirementSet) -> ModelCount {
        let formula: Formula = rs.clauses().iter().map(|c| c.literals().iter().map(|&l| Lit::from(l)).collect()).collect();
        ModelCount(self.count_formula(canonical(formula), rs.num_labels()))
    }

    /// Count of `formula` over `scope` variables, all of which are free
    /// unless mentioned by the formula.
    fn count_formula(&mut self, mut formula: Formula, scope: usize) -> BigUint {
        if formula.iter().any(|c| c.is_empty()) {
            return BigUint::zero();
        }
        let mut fixed = 0;
        while let Some(unit) = formula.iter().find(|c| c.len() == 1).map(|c| c[0]) {
            match propagate(&formula, unit) {
                None => return BigUint::zero(),
                Some((rest, assigned)) => {
                    fixed += assigned;
                    formula = canonical(rest);
                }
            }
        }
        let free = scope - fixed - vars_of(&formula).len();
        pow2(free) * self.count_components(formula)
    }

    fn count_components(&mut self, formula: Formula) -> BigUint {
        let mut total = BigUint::one();
        for comp in components(formula) {
            self.stats.components += 1;
            let c = self.count_component(comp);
            if c.is_zero() {
                return c;
            }
            total *= c;
        }
        total
    }

    fn count_component(&mut self, formula: Formula) -> BigUint {
        if formula.is_empty() {
            return BigUint::one();
        }
        if let Some(hit) = self.cache.get(&formula) {
            self.stats.cache_hits += 1;
            return hit.clone();
        }
        let vars = vars_of(&formula);
        let branch = branch_var(&formula, &vars);
        let mut total = BigUint::zero();
        for positive in [true, false] {
            self.stats.decisions += 1;
            let lit = Lit::new(branch, positive);
            if let Some((rest, assigned)) = propagate(&formula, lit) {
                let free = vars.len() - assigned - vars_of(&rest).len();
                total += pow2(free) * self.count_components(rest);
            }
        }
        self.cache.insert(formula, total.clone());
        total
    }
}

/// Most occurrences, ties to the lowest index.
fn branch_var(formula: &Formula, vars: &[usize]) -> usize {
    let mut occ: HashMap<usize, usize> = vars.iter().map(|&v| (v, 0)).collect();
    for l in formula.iter().flatten() {
        *occ.get_mut(&l.var()).expect("var collected") += 1;
    }
    vars.iter().copied().max_by(|a, b| occ[a].cmp(&occ[b]).then(b.cmp(a))).expect("nonempty formula")
}

/// Exact number of admissible predictions for `rs`.
pub fn count_models(rs: &RequirementSet) -> ModelCount {
    ModelCounter::new().count(rs)
}
