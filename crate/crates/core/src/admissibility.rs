//! Thresholding scores into predictions and measuring requirement violations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::requirements::RequirementSet;

/// Per-label model outputs for one data point, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    scores: Vec<f64>,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = scores.iter().enumerate().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidScore { index, value });
        }
        Ok(Self { id: None, scores })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn ensure_len(&self, expected: usize) -> Result<()> {
        if self.scores.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: self.scores.len() });
        }
        Ok(())
    }
}

/// A total assignment: `true` means the label is predicted positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prediction(Vec<bool>);

impl Prediction {
    pub fn new(assignment: Vec<bool>) -> Self {
        Self(assignment)
    }

    pub fn all_positive(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn all_negative(n: usize) -> Self {
        Self(vec![false; n])
    }

    /// Bit `i` of `bits` gives label `i`.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        Self((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, label: usize) -> bool {
        self.0[label]
    }

    pub fn set(&mut self, label: usize, value: bool) {
        self.0[label] = value;
    }

    pub fn positives(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// Labels on which `self` and `other` disagree, ascending.
    pub fn diff(&self, other: &Prediction) -> Vec<usize> {
        self.0.iter().zip(&other.0).enumerate().filter(|(_, (a, b))| a != b).map(|(i, _)| i).collect()
    }
}

impl From<Vec<bool>> for Prediction {
    fn from(v: Vec<bool>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub violated: Vec<usize>,
}

impl ViolationReport {
    pub fn is_admissible(&self) -> bool {
        self.violated.is_empty()
    }

    pub fn count(&self) -> usize {
        self.violated.len()
    }
}

pub fn validate_threshold(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidThreshold(theta));
    }
    Ok(())
}

/// Label `i` is positive iff its score is strictly greater than `theta`.
pub fn threshold(sv: &ScoreVector, theta: f64) -> Result<Prediction> {
    validate_threshold(theta)?;
    Ok(threshold_unchecked(sv.scores(), theta))
}

pub(crate) fn threshold_unchecked(scores: &[f64], theta: f64) -> Prediction {
    Prediction(scores.iter().map(|&s| s > theta).collect())
}

/// Indices of the clauses falsified by `p`.
///
/// # Panics
///
/// If `p` does not assign every label of `rs`.
pub fn check(rs: &RequirementSet, p: &Prediction) -> ViolationReport {
    assert_eq!(p.len(), rs.num_labels(), "prediction must assign every label");
    let assignment = p.as_slice();
    let violated = rs.clauses().iter().enumerate().filter(|(_, c)| !c.is_satisfied_by(assignment)).map(|(i, _)| i).collect();
    ViolationReport { violated }
}

pub fn is_admissible(rs: &RequirementSet, p: &Prediction) -> bool {
    let assignment = p.as_slice();
    rs.clauses().iter().all(|c| c.is_satisfied_by(assignment))
}

/// The three corpus-level violation measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMetrics {
    /// Percentage of predictions violating at least one clause.
    pub pct_nonadmissible: f64,
    /// Mean number of violated clauses per prediction.
    pub avg_violations: f64,
    /// Percentage of clauses violated by at least one prediction.
    pub pct_constraints_violated: f64,
}

/// Additive violation counts; partial accumulators over disjoint slices of a
/// corpus merge into the accumulator of the whole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsAccumulator {
    n_predictions: u64,
    n_nonadmissible: u64,
    total_violations: u64,
    violated_once: Vec<bool>,
}

impl MetricsAccumulator {
    pub fn new(n_clauses: usize) -> Self {
        Self { n_predictions: 0, n_nonadmissible: 0, total_violations: 0, violated_once: vec![false; n_clauses] }
    }

    pub fn add_report(&mut self, report: &ViolationReport) {
        self.n_predictions += 1;
        self.n_nonadmissible += u64::from(!report.is_admissible());
        self.total_violations += report.count() as u64;
        for &i in &report.violated {
            self.violated_once[i] = true;
        }
    }

    pub fn add(&mut self, rs: &RequirementSet, p: &Prediction) {
        self.add_report(&check(rs, p));
    }

    pub fn merge(&mut self, other: &MetricsAccumulator) {
        assert_eq!(self.violated_once.len(), other.violated_once.len());
        self.n_predictions += other.n_predictions;
        self.n_nonadmissible += other.n_nonadmissible;
        self.total_violations += other.total_violations;
        for (a, b) in self.violated_once.iter_mut().zip(&other.violated_once) {
            *a |= *b;
        }
    }

    pub fn n_predictions(&self) -> u64 {
        self.n_predictions
    }

    pub fn finish(&self) -> Result<CorpusMetrics> {
        if self.n_predictions == 0 {
            return Err(Error::EmptyCorpus);
        }
        let n = self.n_predictions as f64;
        let n_clauses = self.violated_once.len();
        let once = self.violated_once.iter().filter(|&&b| b).count();
        Ok(CorpusMetrics {
            pct_nonadmissible: 100.0 * self.n_nonadmissible as f64 / n,
            avg_violations: self.total_violations as f64 / n,
            pct_constraints_violated: if n_clauses == 0 { 0.0 } else { 100.0 * once as f64 / n_clauses as f64 },
        })
    }
}

pub fn corpus_metrics(rs: &RequirementSet, svs: &[ScoreVector], theta: f64) -> Result<CorpusMetrics> {
    validate_threshold(theta)?;
    let mut acc = MetricsAccumulator::new(rs.len());
    for sv in svs {
        sv.ensure_len(rs.num_labels())?;
        acc.add(rs, &threshold_unchecked(sv.scores(), theta));
    }
    acc.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    #[serde(flatten)]
    pub metrics: CorpusMetrics,
}

/// `θ = 0.1, 0.2, …, 0.9`.
pub fn default_thetas() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

/// Streaming sweep: one accumulator per threshold, fed one score vector at a
/// time.
#[derive(Debug, Clone)]
pub struct SweepAccumulator {
    thetas: Vec<f64>,
    accs: Vec<MetricsAccumulator>,
}

impl SweepAccumulator {
    pub fn new(thetas: Vec<f64>, n_clauses: usize) -> Result<Self> {
        for &t in &thetas {
            validate_threshold(t)?;
        }
        let accs = vec![MetricsAccumulator::new(n_clauses); thetas.len()];
        Ok(Self { thetas, accs })
    }

    pub fn add(&mut self, rs: &RequirementSet, sv: &ScoreVector) -> Result<()> {
        sv.ensure_len(rs.num_labels())?;
        for (theta, acc) in self.thetas.iter().zip(&mut self.accs) {
            acc.add(rs, &threshold_unchecked(sv.scores(), *theta));
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &SweepAccumulator) {
        assert_eq!(self.thetas, other.thetas);
        for (a, b) in self.accs.iter_mut().zip(&other.accs) {
            a.merge(b);
        }
    }

    pub fn finish(&self) -> Result<Vec<SweepRow>> {
        self.thetas.iter().zip(&self.accs).map(|(&theta, acc)| Ok(SweepRow { theta, metrics: acc.finish()? })).collect()
    }
}

pub fn metrics_sweep(rs: &RequirementSet, svs: &[ScoreVector], thetas: &[f64]) -> Result<Vec<SweepRow>> {
    let mut sweep = SweepAccumulator::new(thetas.to_vec(), rs.len())?;
    for sv in svs {
        sweep.add(rs, sv)?;
    }
    sweep.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::requirements::{parse_requirements, Clause, Literal};
    use crate::LabelTable;

    fn sv(scores: Vec<f64>) -> ScoreVector {
        ScoreVector::new(scores).unwrap()
    }

    #[test]
    fn threshold_is_strict() {
        let p = threshold(&sv(vec![0.6, 0.4, 0.5]), 0.5).unwrap();
        assert_eq!(p.as_slice(), &[true, false, false]);
    }

    #[test]
    fn threshold_zero_makes_positive_scores_positive() {
        let p = threshold(&sv(vec![0.01, 1.0, 0.0]), 0.0).unwrap();
        assert_eq!(p.as_slice(), &[true, true, false]);
    }

    #[test]
    fn threshold_rejects_out_of_range() {
        assert!(matches!(threshold(&sv(vec![0.5]), 1.5), Err(Error::InvalidThreshold(_))));
        assert!(matches!(threshold(&sv(vec![0.5]), -0.1), Err(Error::InvalidThreshold(_))));
        assert!(threshold(&sv(vec![0.5]), f64::NAN).is_err());
    }

    #[test]
    fn score_validation() {
        assert!(ScoreVector::new(vec![0.0, 1.0]).is_ok());
        assert!(matches!(ScoreVector::new(vec![0.2, 1.1]), Err(Error::InvalidScore { index: 1, .. })));
        assert!(ScoreVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn red_and_green_violates() {
        let table = LabelTable::road();
        let rs = parse_requirements("{not Red, not Green}", table.clone()).unwrap();
        let mut p = Prediction::all_negative(41);
        p.set(table.index_of("Red").unwrap(), true);
        assert!(check(&rs, &p).is_admissible());
        p.set(table.index_of("Green").unwrap(), true);
        assert_eq!(check(&rs, &p).violated, vec![0]);
    }

    #[test]
    fn corpus_extremes() {
        let rs = RequirementSet::road_r();
        assert_eq!(check(&rs, &Prediction::all_negative(41)).count(), 2);
        assert_eq!(check(&rs, &Prediction::all_positive(41)).count(), 214);
    }

    #[test]
    fn corpus_metrics_limits() {
        let rs = RequirementSet::road_r();
        let zeros = vec![sv(vec![0.0; 41]); 3];
        let m = corpus_metrics(&rs, &zeros, 0.5).unwrap();
        assert_eq!(m.pct_nonadmissible, 100.0);
        assert_eq!(m.avg_violations, 2.0);
        assert_eq!(m.pct_constraints_violated, 2.0 / 243.0 * 100.0);

        let ones = vec![sv(vec![1.0; 41]); 2];
        let m = corpus_metrics(&rs, &ones, 0.5).unwrap();
        assert_eq!(m.pct_nonadmissible, 100.0);
        assert_eq!(m.avg_violations, 214.0);
        assert_eq!(m.pct_constraints_violated, 214.0 / 243.0 * 100.0);
    }

    #[test]
    fn admissible_single_prediction() {
        let rs = RequirementSet::new(LabelTable::synthetic(2), vec![Clause::new([Literal::neg(0), Literal::neg(1)]).unwrap()]).unwrap();
        let m = corpus_metrics(&rs, &[sv(vec![0.9, 0.1])], 0.5).unwrap();
        assert_eq!(m, CorpusMetrics { pct_nonadmissible: 0.0, avg_violations: 0.0, pct_constraints_violated: 0.0 });
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let rs = RequirementSet::road_r();
        assert!(matches!(corpus_metrics(&rs, &[], 0.5), Err(Error::EmptyCorpus)));
        assert!(matches!(metrics_sweep(&rs, &[], &[0.5]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let rs = RequirementSet::road_r();
        assert!(matches!(corpus_metrics(&rs, &[sv(vec![0.0; 40])], 0.5), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn single_theta_sweep_matches_metrics() {
        let rs = RequirementSet::road_r();
        let svs: Vec<_> = (0..5).map(|k| sv((0..41).map(|i| ((i * 7 + k * 13) % 11) as f64 / 10.0).collect())).collect();
        let rows = metrics_sweep(&rs, &svs, &[0.5]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].metrics, corpus_metrics(&rs, &svs, 0.5).unwrap());
    }

    #[test]
    fn merge_is_order_independent() {
        let rs = RequirementSet::road_r();
        let preds = [Prediction::all_negative(41), Prediction::all_positive(41), Prediction::from_bits(0b1011, 41)];
        let mut forward = MetricsAccumulator::new(rs.len());
        for p in &preds {
            let mut part = MetricsAccumulator::new(rs.len());
            part.add(&rs, p);
            forward.merge(&part);
        }
        let mut backward = MetricsAccumulator::new(rs.len());
        for p in preds.iter().rev() {
            backward.add(&rs, p);
        }
        assert_eq!(forward, backward);
    }
}
