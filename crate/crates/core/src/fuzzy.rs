//! Fuzzy relaxation of the requirements as a differentiable penalty.
//!
//! A literal takes the score of its label (positive) or one minus it
//! (negative). A clause is relaxed with the s-norm dual to the chosen t-norm,
//! folded left over its literals in canonical order:
//!
//! | t-norm      | s-norm `a ⊕ b`     |
//! |-------------|--------------------|
//! | Product     | `a + b − a·b`      |
//! | Gödel       | `max(a, b)`        |
//! | Łukasiewicz | `min(1, a + b)`    |
//!
//! The penalty is `α · Σ (1 − t(r))` over all clauses `r`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::admissibility::ScoreVector;
use crate::error::{Error, Result};
use crate::requirements::{Clause, Literal, RequirementSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    Product,
    Goedel,
    Lukasiewicz,
}

impl TNorm {
    pub const ALL: [TNorm; 3] = [TNorm::Product, TNorm::Goedel, TNorm::Lukasiewicz];

    /// The dual s-norm.
    #[inline]
    pub fn disjunction(self, a: f64, b: f64) -> f64 {
        match self {
            TNorm::Product => a + b - a * b,
            TNorm::Goedel => a.max(b),
            TNorm::Lukasiewicz => (a + b).min(1.0),
        }
    }
}

impl fmt::Display for TNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TNorm::Product => "product",
            TNorm::Goedel => "goedel",
            TNorm::Lukasiewicz => "lukasiewicz",
        })
    }
}

impl FromStr for TNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "product" | "prod" => Ok(TNorm::Product),
            "goedel" | "godel" | "gödel" | "min" => Ok(TNorm::Goedel),
            "lukasiewicz" | "łukasiewicz" | "luk" => Ok(TNorm::Lukasiewicz),
            other => Err(Error::InvalidParameter(format!("unknown t-norm `{other}` (expected product, goedel or lukasiewicz)"))),
        }
    }
}

/// How a Gödel clause routes its subgradient when several literals attain the
/// maximum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgradientRule {
    /// The first maximizing literal in canonical order.
    #[default]
    FirstArgmax,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    #[default]
    Sum,
    Mean,
}

/// Common α values for the penalty weight.
pub const ALPHA_GRID: [f64; 3] = [1.0, 10.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub tnorm: TNorm,
    pub alpha: f64,
    #[serde(default)]
    pub subgradient_rule: SubgradientRule,
    /// Evaluate Product clauses through sums of `ln(1 − v)`.
    #[serde(default)]
    pub log_space: bool,
    #[serde(default)]
    pub reduction: Reduction,
}

impl LossConfig {
    pub fn new(tnorm: TNorm, alpha: f64) -> Result<Self> {
        let cfg = Self { tnorm, alpha, subgradient_rule: SubgradientRule::FirstArgmax, log_space: false, reduction: Reduction::Sum };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossResult {
    pub total: f64,
    /// Satisfaction degree of each clause, in `[0, 1]`.
    pub per_clause: Vec<f64>,
    /// `∂ total / ∂ score` per label.
    pub gradient: Vec<f64>,
}

#[inline]
pub fn literal_value(lit: Literal, scores: &[f64]) -> f64 {
    let o = scores[lit.label];
    if lit.positive {
        o
    } else {
        1.0 - o
    }
}

/// Satisfaction degree of `clause`.
pub fn clause_eval(tnorm: TNorm, clause: &Clause, sv: &ScoreVector) -> f64 {
    clause_degree(tnorm, clause, sv.scores(), false)
}

fn clause_degree(tnorm: TNorm, clause: &Clause, scores: &[f64], log_space: bool) -> f64 {
    if tnorm == TNorm::Product && log_space {
        let log_miss: f64 = clause.literals().iter().map(|&l| (1.0 - literal_value(l, scores)).ln()).sum();
        return 1.0 - log_miss.exp();
    }
    let mut lits = clause.literals().iter().map(|&l| literal_value(l, scores));
    let first = lits.next().expect("clauses are nonempty");
    lits.fold(first, |acc, v| tnorm.disjunction(acc, v))
}

/// Adds `scale · ∂t/∂o` for one clause into `grad`.
fn clause_gradient(cfg: &LossConfig, clause: &Clause, scores: &[f64], scale: f64, grad: &mut [f64]) {
    let lits = clause.literals();
    let values: Vec<f64> = lits.iter().map(|&l| literal_value(l, scores)).collect();
    let sign = |l: &Literal| if l.positive { 1.0 } else { -1.0 };
    match cfg.tnorm {
        TNorm::Product => {
            // ∂t/∂v_k = Π_{j≠k} (1 − v_j)
            let n = values.len();
            if cfg.log_space {
                let logs: Vec<f64> = values.iter().map(|v| (1.0 - v).ln()).collect();
                let mut prefix = vec![0.0; n + 1];
                for k in 0..n {
                    prefix[k + 1] = prefix[k] + logs[k];
                }
                let mut suffix = 0.0;
                for k in (0..n).rev() {
                    grad[lits[k].label] += scale * sign(&lits[k]) * (prefix[k] + suffix).exp();
                    suffix += logs[k];
                }
            } else {
                let mut prefix = vec![1.0; n + 1];
                for k in 0..n {
                    prefix[k + 1] = prefix[k] * (1.0 - values[k]);
                }
                let mut suffix = 1.0;
                for k in (0..n).rev() {
                    grad[lits[k].label] += scale * sign(&lits[k]) * prefix[k] * suffix;
                    suffix *= 1.0 - values[k];
                }
            }
        }
        TNorm::Goedel => {
            let SubgradientRule::FirstArgmax = cfg.subgradient_rule;
            let mut arg = 0;
            for (k, &v) in values.iter().enumerate() {
                if v > values[arg] {
                    arg = k;
                }
            }
            grad[lits[arg].label] += scale * sign(&lits[arg]);
        }
        TNorm::Lukasiewicz => {
            if values.iter().sum::<f64>() < 1.0 {
                for l in lits {
                    grad[l.label] += scale * sign(l);
                }
            }
        }
    }
}

/// Penalty, clause degrees and gradient on raw scores (no range check).
pub fn loss_on_scores(rs: &RequirementSet, scores: &[f64], cfg: &LossConfig) -> LossResult {
    let per_clause: Vec<f64> = rs.clauses().iter().map(|c| clause_degree(cfg.tnorm, c, scores, cfg.log_space)).collect();
    let total = cfg.alpha * per_clause.iter().map(|t| 1.0 - t).sum::<f64>();
    let mut gradient = vec![0.0; rs.num_labels()];
    for clause in rs.clauses() {
        // L = α Σ (1 − t): dL/do = −α dt/do
        clause_gradient(cfg, clause, scores, -cfg.alpha, &mut gradient);
    }
    LossResult { total, per_clause, gradient }
}

pub fn loss(rs: &RequirementSet, sv: &ScoreVector, cfg: &LossConfig) -> Result<LossResult> {
    cfg.validate()?;
    sv.ensure_len(rs.num_labels())?;
    Ok(loss_on_scores(rs, sv.scores(), cfg))
}

/// Central finite-difference gradient of the penalty with step `h`.
pub fn finite_difference_gradient(rs: &RequirementSet, scores: &[f64], cfg: &LossConfig, h: f64) -> Vec<f64> {
    let mut probe = scores.to_vec();
    (0..scores.len())
        .map(|j| {
            probe[j] = scores[j] + h;
            let up = loss_on_scores(rs, &probe, cfg).total;
            probe[j] = scores[j] - h;
            let down = loss_on_scores(rs, &probe, cfg).total;
            probe[j] = scores[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusLoss {
    pub reduction: Reduction,
    /// Sum or mean of item totals.
    pub total: f64,
    /// Sum or mean of item gradients.
    pub gradient: Vec<f64>,
    pub items: Vec<LossResult>,
}

pub fn loss_corpus(rs: &RequirementSet, svs: &[ScoreVector], cfg: &LossConfig) -> Result<CorpusLoss> {
    if svs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let items = svs.iter().map(|sv| loss(rs, sv, cfg)).collect::<Result<Vec<_>>>()?;
    let scale = match cfg.reduction {
        Reduction::Sum => 1.0,
        Reduction::Mean => 1.0 / items.len() as f64,
    };
    let mut gradient = vec![0.0; rs.num_labels()];
    let mut total = 0.0;
    for item in &items {
        total += item.total;
        for (g, x) in gradient.iter_mut().zip(&item.gradient) {
            *g += x;
        }
    }
    gradient.iter_mut().for_each(|g| *g *= scale);
    Ok(CorpusLoss { reduction: cfg.reduction, total: total * scale, gradient, items })
}
