//! Minimum-cost correction of non-admissible predictions.
//!
//! A correction of a prediction `p` is an admissible prediction `q`; its cost
//! is the sum of the weights of the labels on which `q` differs from `p`. This
//! is weighted partial MaxSAT with the requirements as hard clauses and one
//! weighted soft unit clause per label of `p`.
//!
//! The solver is an exact branch-and-bound over label assignments:
//!
//! - hard clauses are propagated incrementally (a clause with no true literal
//!   and one open literal forces it),
//! - a node is a leaf as soon as keeping every open label at its value in `p`
//!   satisfies all hard clauses,
//! - the lower bound adds, over a greedy packing of variable-disjoint clauses
//!   that would be falsified by that default completion, the cheapest flip
//!   each of them still needs,
//! - the initial upper bound comes from greedy repair.
//!
//! Among optima whose costs agree within [`COST_TOLERANCE`], the one with the
//! lexicographically smallest ascending list of flipped labels is returned.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admissibility::{is_admissible, threshold_unchecked, validate_threshold, Prediction, ScoreVector};
use crate::error::{Error, Result};
use crate::requirements::{write_dimacs_clause, RequirementSet};

/// Floor applied to weights that would otherwise be zero.
pub const WEIGHT_FLOOR: f64 = 1e-9;
/// Default flip offset around the threshold.
pub const DEFAULT_FLIP_EPSILON: f64 = 1e-3;
/// Costs closer than this are treated as equal.
pub const COST_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionPolicy {
    /// Unit weights: fewest flips.
    Md,
    /// Weight = per-label average precision.
    Ap,
    /// Weight = average precision times output confidence.
    Apo,
}

impl CorrectionPolicy {
    pub fn name(self) -> &'static str {
        match self {
            CorrectionPolicy::Md => "md",
            CorrectionPolicy::Ap => "ap",
            CorrectionPolicy::Apo => "apo",
        }
    }
}

impl fmt::Display for CorrectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorrectionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "md" => Ok(CorrectionPolicy::Md),
            "ap" => Ok(CorrectionPolicy::Ap),
            "apo" | "apxo" | "ap*o" => Ok(CorrectionPolicy::Apo),
            other => Err(Error::InvalidParameter(format!("unknown policy `{other}` (expected md, ap or apo)"))),
        }
    }
}

/// Strictly positive per-label flip costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::NonPositiveWeight { index, value });
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum of the weights of `labels`, accumulated in ascending label order.
    pub fn cost_of(&self, labels: &[usize]) -> f64 {
        let mut sorted = labels.to_vec();
        sorted.sort_unstable();
        sorted.iter().map(|&i| self.0[i]).sum()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Per-label flip costs for `policy`, clamping zero weights up to
/// [`WEIGHT_FLOOR`].
pub fn compute_weights(policy: CorrectionPolicy, sv: &ScoreVector, ap: Option<&[f64]>, theta: f64) -> Result<WeightVector> {
    compute_weights_with_floor(policy, sv, ap, theta, Some(WEIGHT_FLOOR))
}

/// As [`compute_weights`]; with `floor = None` a zero weight is an error.
pub fn compute_weights_with_floor(
    policy: CorrectionPolicy,
    sv: &ScoreVector,
    ap: Option<&[f64]>,
    theta: f64,
    floor: Option<f64>,
) -> Result<WeightVector> {
    validate_threshold(theta)?;
    let n = sv.len();
    let raw: Vec<f64> = match policy {
        CorrectionPolicy::Md => vec![1.0; n],
        CorrectionPolicy::Ap | CorrectionPolicy::Apo => {
            let ap = ap.ok_or(Error::MissingAveragePrecision(policy.name()))?;
            if ap.len() != n {
                return Err(Error::LengthMismatch { expected: n, actual: ap.len() });
            }
            if let Some((index, &value)) = ap.iter().enumerate().find(|(_, a)| !(0.0..=1.0).contains(*a)) {
                return Err(Error::InvalidParameter(format!("average precision {value} for label {index} outside [0, 1]")));
            }
            if policy == CorrectionPolicy::Ap {
                ap.to_vec()
            } else {
                ap.iter()
                    .zip(sv.scores())
                    .map(|(&a, &o)| {
                        let confidence = if o > theta { o } else { 1.0 - o };
                        a * confidence
                    })
                    .collect()
            }
        }
    };
    let weights = match floor {
        Some(floor) => raw.into_iter().map(|w| w.max(floor)).collect(),
        None => raw,
    };
    WeightVector::new(weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Infeasible {
    #[error("requirements are unsatisfiable")]
    Unsatisfiable,
    #[error("optimal correction cost {optimum} exceeds budget {budget}")]
    OverBudget { optimum: f64, budget: f64 },
}

/// An optimal admissible correction of a prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub corrected: Prediction,
    /// Flipped labels, ascending.
    pub flipped: Vec<usize>,
    pub cost: f64,
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct Problem<'a> {
    clauses: Vec<Vec<(usize, bool)>>,
    /// var -> (clause, literal polarity)
    occurs: Vec<Vec<(usize, bool)>>,
    original: &'a [bool],
    weights: &'a [f64],
}

impl<'a> Problem<'a> {
    fn new(rs: &RequirementSet, original: &'a [bool], weights: &'a [f64]) -> Self {
        let n = rs.num_labels();
        let clauses: Vec<Vec<(usize, bool)>> =
            rs.clauses().iter().map(|c| c.literals().iter().map(|l| (l.label, l.positive)).collect()).collect();
        let mut occurs = vec![Vec::new(); n];
        for (ci, clause) in clauses.iter().enumerate() {
            for &(v, pos) in clause {
                occurs[v].push((ci, pos));
            }
        }
        Self { clauses, occurs, original, weights }
    }

    fn n(&self) -> usize {
        self.original.len()
    }
}

#[derive(Clone, Copy)]
enum Goal {
    /// Find the cheapest completion, improving on an incumbent of this cost.
    Minimize,
    /// Stop at the first completion with cost at most the limit.
    Within(f64),
}

struct Search<'p, 'a> {
    problem: &'p Problem<'a>,
    value: Vec<Option<bool>>,
    trail: Vec<usize>,
    n_true: Vec<u32>,
    n_open: Vec<u32>,
    cost: f64,
    goal: Goal,
    best_cost: f64,
    best: Option<Vec<bool>>,
    nodes: u64,
}

impl<'p, 'a> Search<'p, 'a> {
    fn new(problem: &'p Problem<'a>, goal: Goal) -> Self {
        Self {
            problem,
            value: vec![None; problem.n()],
            trail: Vec::new(),
            n_true: vec![0; problem.clauses.len()],
            n_open: problem.clauses.iter().map(|c| c.len() as u32).collect(),
            cost: 0.0,
            goal,
            best_cost: f64::INFINITY,
            best: None,
            nodes: 0,
        }
    }

    fn assign(&mut self, var: usize, val: bool) {
        debug_assert!(self.value[var].is_none());
        self.value[var] = Some(val);
        self.trail.push(var);
        if val != self.problem.original[var] {
            self.cost += self.problem.weights[var];
        }
        for &(ci, pos) in &self.problem.occurs[var] {
            self.n_open[ci] -= 1;
            if pos == val {
                self.n_true[ci] += 1;
            }
        }
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let var = self.trail.pop().expect("trail nonempty");
            let val = self.value[var].take().expect("assigned");
            if val != self.problem.original[var] {
                self.cost -= self.problem.weights[var];
            }
            for &(ci, pos) in &self.problem.occurs[var] {
                self.n_open[ci] += 1;
                if pos == val {
                    self.n_true[ci] -= 1;
                }
            }
        }
    }

    /// Assigns `var = val` and propagates hard clauses touched by the
    /// assignments. Returns false on conflict.
    fn assign_and_propagate(&mut self, var: usize, val: bool) -> bool {
        if let Some(v) = self.value[var] {
            return v == val;
        }
        let start = self.trail.len();
        self.assign(var, val);
        let mut head = start;
        while head < self.trail.len() {
            let v = self.trail[head];
            head += 1;
            for &(ci, _) in &self.problem.occurs[v] {
                if self.n_true[ci] > 0 {
                    continue;
                }
                match self.n_open[ci] {
                    0 => return false,
                    1 => {
                        let &(u, pos) = self.problem.clauses[ci].iter().find(|(u, _)| self.value[*u].is_none()).expect("one open literal");
                        self.assign(u, pos);
                    }
                    _ => {}
                }
            }
        }
        true
    }

    /// Clause falsified when every open label keeps its original value.
    fn pending(&self, ci: usize) -> bool {
        self.n_true[ci] == 0 && self.problem.clauses[ci].iter().all(|&(u, pos)| self.value[u].is_some() || self.problem.original[u] != pos)
    }

    fn lower_bound(&self, used: &mut [bool]) -> f64 {
        used.iter_mut().for_each(|u| *u = false);
        let mut bound = 0.0;
        for ci in 0..self.problem.clauses.len() {
            if !self.pending(ci) {
                continue;
            }
            let open = || self.problem.clauses[ci].iter().filter(|(u, _)| self.value[*u].is_none());
            if open().any(|(u, _)| used[*u]) {
                continue;
            }
            let mut cheapest = f64::INFINITY;
            for &(u, _) in open() {
                used[u] = true;
                cheapest = cheapest.min(self.problem.weights[u]);
            }
            bound += cheapest;
        }
        bound
    }

    fn prune(&self, bound: f64) -> bool {
        match self.goal {
            Goal::Minimize => bound >= self.best_cost - COST_TOLERANCE,
            Goal::Within(limit) => bound > limit,
        }
    }

    fn completion(&self) -> Vec<bool> {
        self.value.iter().zip(self.problem.original).map(|(v, &o)| v.unwrap_or(o)).collect()
    }

    fn sorted_cost(&self, assignment: &[bool]) -> f64 {
        assignment.iter().zip(self.problem.original).zip(self.problem.weights).filter(|((a, o), _)| a != o).map(|(_, w)| *w).sum()
    }

    /// Returns true when the search should stop.
    fn descend(&mut self, used: &mut Vec<bool>) -> bool {
        self.nodes += 1;
        // most constrained pending clause, lowest index on ties
        let mut target: Option<(u32, usize)> = None;
        for ci in 0..self.problem.clauses.len() {
            if self.pending(ci) && target.is_none_or(|(open, _)| self.n_open[ci] < open) {
                target = Some((self.n_open[ci], ci));
            }
        }
        let Some((_, ci)) = target else {
            let assignment = self.completion();
            let cost = self.sorted_cost(&assignment);
            let accept = match self.goal {
                Goal::Minimize => cost < self.best_cost - COST_TOLERANCE,
                Goal::Within(limit) => cost <= limit,
            };
            if accept {
                self.best_cost = cost;
                self.best = Some(assignment);
            }
            return accept && matches!(self.goal, Goal::Within(_));
        };
        if self.prune(self.cost + self.lower_bound(used)) {
            return false;
        }
        let &(var, _) =
            self.problem.clauses[ci].iter().find(|(u, _)| self.value[*u].is_none()).expect("pending clause has an open literal");
        let keep = self.problem.original[var];
        for val in [!keep, keep] {
            let mark = self.trail.len();
            if self.assign_and_propagate(var, val) && self.descend(used) {
                self.undo_to(mark);
                return true;
            }
            self.undo_to(mark);
        }
        false
    }

    /// Runs the search below the given fixed assignments.
    fn run(mut self, fixed: &[Option<bool>], incumbent: Option<(f64, Vec<bool>)>) -> (Option<(f64, Vec<bool>)>, u64) {
        if let Some((c, a)) = incumbent {
            self.best_cost = c;
            self.best = Some(a);
        }
        for (var, val) in fixed.iter().enumerate() {
            if let Some(val) = *val {
                if !self.assign_and_propagate(var, val) {
                    return (self.best.map(|a| (self.best_cost, a)), self.nodes);
                }
            }
        }
        let mut used = vec![false; self.problem.n()];
        self.descend(&mut used);
        let nodes = self.nodes;
        (self.best.map(|a| (self.best_cost, a)), nodes)
    }
}

/// Greedy repair: repeatedly flip the cheapest not-yet-flipped label of the
/// first violated clause.
fn greedy_repair(problem: &Problem<'_>) -> Option<Vec<bool>> {
    let mut q = problem.original.to_vec();
    let mut flipped = vec![false; q.len()];
    for _ in 0..=q.len() {
        let Some(clause) = problem.clauses.iter().find(|c| !c.iter().any(|&(u, pos)| q[u] == pos)) else {
            return Some(q);
        };
        let (var, _) = clause
            .iter()
            .filter(|(u, _)| !flipped[*u])
            .min_by(|(a, _), (b, _)| problem.weights[*a].total_cmp(&problem.weights[*b]).then(a.cmp(b)))?;
        flipped[*var] = true;
        q[*var] = !q[*var];
    }
    None
}

/// Statistics of one [`correct`] call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub queries: u64,
}

/// Cheapest admissible correction of `p` under weights `w`.
///
/// With a `budget`, corrections costing more than the budget are reported as
/// [`Infeasible::OverBudget`].
///
/// # Panics
///
/// If `p` or `w` do not cover every label of `rs`.
pub fn correct(rs: &RequirementSet, p: &Prediction, w: &WeightVector, budget: Option<f64>) -> Result<Correction, Infeasible> {
    correct_with_stats(rs, p, w, budget).map(|(c, _)| c)
}

pub fn correct_with_stats(
    rs: &RequirementSet,
    p: &Prediction,
    w: &WeightVector,
    budget: Option<f64>,
) -> Result<(Correction, SearchStats), Infeasible> {
    let n = rs.num_labels();
    assert_eq!(p.len(), n, "prediction must assign every label");
    assert_eq!(w.len(), n, "one weight per label");
    let mut stats = SearchStats::default();

    if is_admissible(rs, p) {
        return Ok((Correction { corrected: p.clone(), flipped: Vec::new(), cost: 0.0 }, stats));
    }

    let problem = Problem::new(rs, p.as_slice(), w.as_slice());
    let incumbent = greedy_repair(&problem).map(|q| {
        let cost = w.cost_of(&p.diff(&Prediction::new(q.clone())));
        (cost, q)
    });
    let (optimum, nodes) = Search::new(&problem, Goal::Minimize).run(&vec![None; n], incumbent);
    stats.nodes += nodes;
    stats.queries += 1;
    let Some((optimum, fallback)) = optimum else {
        return Err(Infeasible::Unsatisfiable);
    };
    if let Some(budget) = budget {
        if optimum > budget + COST_TOLERANCE {
            return Err(Infeasible::OverBudget { optimum, budget });
        }
    }

    // Lexicographically smallest optimal flip set: extend the flip list one
    // label at a time, taking the lowest label that still admits an optimum.
    let limit = optimum + COST_TOLERANCE;
    let mut fixed: Vec<Option<bool>> = vec![None; n];
    let mut flips: Vec<usize> = Vec::new();
    let mut start = 0;
    let chosen = loop {
        let mut candidate = p.clone();
        for &f in &flips {
            candidate.set(f, !p.get(f));
        }
        if is_admissible(rs, &candidate) {
            break candidate;
        }
        let mut next = None;
        for j in start..n {
            let mut trial = fixed.clone();
            for (k, slot) in trial.iter_mut().enumerate().take(j).skip(start) {
                *slot = Some(p.get(k));
            }
            trial[j] = Some(!p.get(j));
            let (found, nodes) = Search::new(&problem, Goal::Within(limit)).run(&trial, None);
            stats.nodes += nodes;
            stats.queries += 1;
            if found.is_some() {
                next = Some((j, trial));
                break;
            }
        }
        if let Some((j, trial)) = next {
            fixed = trial;
            flips.push(j);
            start = j + 1;
        } else {
            debug_assert!(false, "an optimum extends every accepted prefix");
            break Prediction::new(fallback);
        }
    };
    let flipped = p.diff(&chosen);
    let cost = w.cost_of(&flipped);
    Ok((Correction { corrected: chosen, flipped, cost }, stats))
}

/// Moves flipped scores just across the threshold: a label flipped to
/// positive gets `θ + ε`, one flipped to negative gets `θ − ε`, both clamped
/// to `[0, 1]`. A score equal to `θ` counts as negative.
pub fn apply_flips(sv: &ScoreVector, flipped: &[usize], theta: f64, epsilon: f64) -> ScoreVector {
    let mut scores = sv.scores().to_vec();
    for &i in flipped {
        scores[i] = if scores[i] <= theta { (theta + epsilon).min(1.0) } else { (theta - epsilon).max(0.0) };
    }
    let mut out = ScoreVector::new(scores).expect("clamped scores stay in [0, 1]");
    out.id = sv.id.clone();
    out
}

/// One corrected data point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionResult {
    pub id: Option<String>,
    pub original: Prediction,
    pub corrected: Prediction,
    pub flipped: Vec<usize>,
    pub cost: f64,
    pub adjusted_scores: ScoreVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionConfig {
    pub theta: f64,
    pub policy: CorrectionPolicy,
    pub epsilon: f64,
    pub budget: Option<f64>,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        Self { theta: 0.5, policy: CorrectionPolicy::Md, epsilon: DEFAULT_FLIP_EPSILON, budget: None }
    }
}

/// Threshold, weigh, correct and adjust one score vector.
pub fn correct_item(
    rs: &RequirementSet,
    sv: &ScoreVector,
    ap: Option<&[f64]>,
    cfg: &CorrectionConfig,
) -> Result<Result<CorrectionResult, Infeasible>> {
    validate_threshold(cfg.theta)?;
    if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("flip epsilon must be positive, got {}", cfg.epsilon)));
    }
    sv.ensure_len(rs.num_labels())?;
    let original = threshold_unchecked(sv.scores(), cfg.theta);
    let weights = compute_weights(cfg.policy, sv, ap, cfg.theta)?;
    Ok(correct(rs, &original, &weights, cfg.budget).map(|c| CorrectionResult {
        id: sv.id.clone(),
        adjusted_scores: apply_flips(sv, &c.flipped, cfg.theta, cfg.epsilon),
        original,
        corrected: c.corrected,
        flipped: c.flipped,
        cost: c.cost,
    }))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlipSummary {
    pub n_items: usize,
    pub n_corrected: usize,
    pub n_infeasible: usize,
    pub total_flips: usize,
    pub total_cost: f64,
}

impl FlipSummary {
    pub fn add(&mut self, item: &Result<CorrectionResult, Infeasible>) {
        self.n_items += 1;
        match item {
            Ok(r) => {
                self.n_corrected += usize::from(!r.flipped.is_empty());
                self.total_flips += r.flipped.len();
                self.total_cost += r.cost;
            }
            Err(_) => self.n_infeasible += 1,
        }
    }

    pub fn mean_cost(&self) -> f64 {
        let solved = self.n_items - self.n_infeasible;
        if solved == 0 {
            0.0
        } else {
            self.total_cost / solved as f64
        }
    }

    pub fn mean_flips(&self) -> f64 {
        let solved = self.n_items - self.n_infeasible;
        if solved == 0 {
            0.0
        } else {
            self.total_flips as f64 / solved as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusCorrection {
    pub items: Vec<Result<CorrectionResult, Infeasible>>,
    pub summary: FlipSummary,
}

/// Corrects every score vector; infeasible items are reported in place.
pub fn correct_corpus(rs: &RequirementSet, svs: &[ScoreVector], ap: Option<&[f64]>, cfg: &CorrectionConfig) -> Result<CorpusCorrection> {
    let items = svs.par_iter().map(|sv| correct_item(rs, sv, ap, cfg)).collect::<Result<Vec<_>>>()?;
    let mut summary = FlipSummary::default();
    for item in &items {
        summary.add(item);
    }
    Ok(CorpusCorrection { items, summary })
}

/// Weighted DIMACS (`p wcnf`) for the correction of `p`: requirements as hard
/// clauses, one soft unit per label carrying its weight scaled by `scale` and
/// rounded (at least 1).
pub fn export_wcnf(rs: &RequirementSet, p: &Prediction, w: &WeightVector, scale: f64) -> String {
    let soft: Vec<u64> = w.as_slice().iter().map(|&x| ((x * scale).round() as u64).max(1)).collect();
    let top = soft.iter().sum::<u64>() + 1;
    let mut out = String::new();
    let _ = writeln!(out, "c hard: requirements; soft: original prediction; weights scaled by {scale}");
    let _ = writeln!(out, "p wcnf {} {} {}", rs.num_labels(), rs.len() + rs.num_labels(), top);
    for clause in rs.clauses() {
        let _ = write!(out, "{top} ");
        write_dimacs_clause(&mut out, clause.literals());
    }
    for (i, weight) in soft.iter().enumerate() {
        let var = i as i64 + 1;
        let lit = if p.get(i) { var } else { -var };
        let _ = writeln!(out, "{weight} {lit} 0");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissibility::check;
    use crate::requirements::{Clause, Literal};
    use crate::LabelTable;

    fn not_both(n: usize) -> RequirementSet {
        RequirementSet::new(LabelTable::synthetic(n), vec![Clause::new([Literal::neg(0), Literal::neg(1)]).unwrap()]).unwrap()
    }

    #[test]
    fn weights_md() {
        let sv = ScoreVector::new(vec![0.9, 0.1, 0.5]).unwrap();
        let w = compute_weights(CorrectionPolicy::Md, &sv, None, 0.5).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn weights_apo() {
        let sv = ScoreVector::new(vec![0.9, 0.2]).unwrap();
        let w = compute_weights(CorrectionPolicy::Apo, &sv, Some(&[0.5, 0.5]), 0.5).unwrap();
        assert!((w.as_slice()[0] - 0.45).abs() < 1e-15);
        assert!((w.as_slice()[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn weights_ap_and_floor() {
        let sv = ScoreVector::new(vec![0.9, 0.2]).unwrap();
        let w = compute_weights(CorrectionPolicy::Ap, &sv, Some(&[0.3, 0.0]), 0.5).unwrap();
        assert_eq!(w.as_slice(), &[0.3, WEIGHT_FLOOR]);
        let err = compute_weights_with_floor(CorrectionPolicy::Ap, &sv, Some(&[0.3, 0.0]), 0.5, None).unwrap_err();
        assert!(matches!(err, Error::NonPositiveWeight { index: 1, .. }));
        assert!(matches!(compute_weights(CorrectionPolicy::Apo, &sv, None, 0.5), Err(Error::MissingAveragePrecision("apo"))));
        assert!(compute_weights(CorrectionPolicy::Ap, &sv, Some(&[0.3]), 0.5).is_err());
        assert!(compute_weights(CorrectionPolicy::Ap, &sv, Some(&[0.3, 1.5]), 0.5).is_err());
    }

    #[test]
    fn admissible_prediction_unchanged() {
        let rs = not_both(2);
        let p = Prediction::new(vec![true, false]);
        let c = correct(&rs, &p, &WeightVector::uniform(2), None).unwrap();
        assert_eq!(c, Correction { corrected: p, flipped: vec![], cost: 0.0 });
    }

    #[test]
    fn md_tie_breaks_to_lowest_index() {
        let rs = not_both(3);
        let p = Prediction::new(vec![true, true, false]);
        let c = correct(&rs, &p, &WeightVector::uniform(3), None).unwrap();
        assert_eq!(c.flipped, vec![0]);
        assert_eq!(c.cost, 1.0);
        assert_eq!(c.corrected.as_slice(), &[false, true, false]);
    }

    #[test]
    fn weighted_flips_cheaper_label() {
        let rs = not_both(2);
        let p = Prediction::new(vec![true, true]);
        let c = correct(&rs, &p, &WeightVector::new(vec![3.0, 1.0]).unwrap(), None).unwrap();
        assert_eq!(c.flipped, vec![1]);
        assert_eq!(c.cost, 1.0);
    }

    #[test]
    fn lexicographic_tie_prefers_smaller_first_index() {
        // (x0 ∨ x1) and (x0 ∨ x2) from all-negative: {0} costs 2, {1,2} costs 2
        let rs = RequirementSet::new(
            LabelTable::synthetic(3),
            vec![Clause::new([Literal::pos(0), Literal::pos(1)]).unwrap(), Clause::new([Literal::pos(0), Literal::pos(2)]).unwrap()],
        )
        .unwrap();
        let w = WeightVector::new(vec![2.0, 1.0, 1.0]).unwrap();
        let c = correct(&rs, &Prediction::all_negative(3), &w, None).unwrap();
        assert_eq!(c.flipped, vec![0]);
        let w = WeightVector::new(vec![2.5, 1.0, 1.0]).unwrap();
        let c = correct(&rs, &Prediction::all_negative(3), &w, None).unwrap();
        assert_eq!(c.flipped, vec![1, 2]);
    }

    #[test]
    fn unsatisfiable_requirements() {
        let rs = RequirementSet::new(
            LabelTable::synthetic(1),
            vec![Clause::new([Literal::pos(0)]).unwrap(), Clause::new([Literal::neg(0)]).unwrap()],
        )
        .unwrap();
        let r = correct(&rs, &Prediction::all_negative(1), &WeightVector::uniform(1), None);
        assert_eq!(r, Err(Infeasible::Unsatisfiable));
    }

    #[test]
    fn budget() {
        let rs = not_both(2);
        let p = Prediction::new(vec![true, true]);
        let w = WeightVector::new(vec![3.0, 2.0]).unwrap();
        assert!(correct(&rs, &p, &w, Some(2.0)).is_ok());
        assert_eq!(correct(&rs, &p, &w, Some(1.5)), Err(Infeasible::OverBudget { optimum: 2.0, budget: 1.5 }));
    }

    #[test]
    fn flip_rule() {
        let sv = ScoreVector::new(vec![0.3, 0.9, 0.7]).unwrap();
        let out = apply_flips(&sv, &[0, 1], 0.5, 1e-3);
        assert_eq!(out.scores(), &[0.501, 0.499, 0.7]);
        assert_eq!(apply_flips(&sv, &[], 0.5, 1e-3), sv);
    }

    #[test]
    fn flip_rule_score_at_threshold_goes_up() {
        let sv = ScoreVector::new(vec![0.5]).unwrap();
        assert_eq!(apply_flips(&sv, &[0], 0.5, 1e-3).scores(), &[0.501]);
    }

    #[test]
    fn flip_rule_clamps() {
        let sv = ScoreVector::new(vec![0.9995, 0.0]).unwrap();
        let out = apply_flips(&sv, &[0, 1], 0.9995, 1e-3);
        assert_eq!(out.scores()[1], 1.0);
        let sv = ScoreVector::new(vec![0.0001]).unwrap();
        assert_eq!(apply_flips(&sv, &[0], 0.0, 1e-3).scores(), &[0.0]);
    }

    #[test]
    fn corpus_extreme_predictions_are_repaired() {
        let rs = RequirementSet::road_r();
        for p in [Prediction::all_negative(41), Prediction::all_positive(41)] {
            let c = correct(&rs, &p, &WeightVector::uniform(41), None).unwrap();
            assert!(check(&rs, &c.corrected).is_admissible());
            assert_eq!(c.cost, c.flipped.len() as f64);
            let again = correct(&rs, &c.corrected, &WeightVector::uniform(41), None).unwrap();
            assert!(again.flipped.is_empty());
        }
    }

    #[test]
    fn correct_item_pipeline() {
        let rs = RequirementSet::road_r();
        let sv = ScoreVector::new(vec![0.9; 41]).unwrap().with_id("box-1");
        let cfg = CorrectionConfig::default();
        let r = correct_item(&rs, &sv, None, &cfg).unwrap().unwrap();
        assert_eq!(r.id.as_deref(), Some("box-1"));
        assert_eq!(threshold_unchecked(r.adjusted_scores.scores(), cfg.theta), r.corrected);
        assert!(check(&rs, &r.corrected).is_admissible());
    }

    #[test]
    fn wcnf_layout() {
        let rs = not_both(2);
        let p = Prediction::new(vec![true, false]);
        let w = WeightVector::new(vec![0.5, 2.0]).unwrap();
        let text = export_wcnf(&rs, &p, &w, 10.0);
        let lines: Vec<_> = text.lines().filter(|l| !l.starts_with('c')).collect();
        assert_eq!(lines, vec!["p wcnf 2 3 26", "26 -1 -2 0", "5 1 0", "20 -2 0"]);
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("MD".parse::<CorrectionPolicy>().unwrap(), CorrectionPolicy::Md);
        assert_eq!("apo".parse::<CorrectionPolicy>().unwrap(), CorrectionPolicy::Apo);
        assert!("foo".parse::<CorrectionPolicy>().is_err());
    }
}
