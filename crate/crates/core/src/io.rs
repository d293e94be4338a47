//! JSON Lines records for predictions, corrections and penalties.
//!
//! Prediction lines look like `{"id": "f1", "scores": [...], "gt": [...]}`
//! with `gt` optional. Blank lines are skipped. Correction records are
//! accepted as prediction input through their `adjusted_scores` field.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::admissibility::{Prediction, ScoreVector};
use crate::error::{Error, Result};
use crate::fuzzy::LossResult;
use crate::maxsat::CorrectionResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(alias = "adjusted_scores")]
    pub scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt: Option<Vec<bool>>,
}

impl PredictionRecord {
    pub fn score_vector(&self) -> Result<ScoreVector> {
        let sv = ScoreVector::new(self.scores.clone())?;
        Ok(match &self.id {
            Some(id) => sv.with_id(id.clone()),
            None => sv,
        })
    }

    pub fn ground_truth(&self) -> Option<Prediction> {
        self.gt.clone().map(Prediction::new)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub flipped: Vec<usize>,
    pub cost: f64,
    pub adjusted_scores: Vec<f64>,
}

impl From<&CorrectionResult> for CorrectionRecord {
    fn from(r: &CorrectionResult) -> Self {
        Self { id: r.id.clone(), flipped: r.flipped.clone(), cost: r.cost, adjusted_scores: r.adjusted_scores.scores().to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub loss: f64,
    pub grad: Vec<f64>,
}

impl LossRecord {
    pub fn new(id: Option<String>, r: &LossResult) -> Self {
        Self { id, loss: r.total, grad: r.gradient.clone() }
    }
}

/// Streams prediction records, validating scores and length.
pub struct PredictionReader<R> {
    inner: R,
    n_labels: usize,
    line: usize,
    buf: String,
}

impl<R: BufRead> PredictionReader<R> {
    pub fn new(inner: R, n_labels: usize) -> Self {
        Self { inner, n_labels, line: 0, buf: String::new() }
    }

    fn parse(&self, text: &str) -> Result<PredictionRecord> {
        let at = |message: String| Error::Input { line: self.line, message };
        let rec: PredictionRecord = serde_json::from_str(text).map_err(|e| at(e.to_string()))?;
        if rec.scores.len() != self.n_labels {
            return Err(at(format!("expected {} scores, got {}", self.n_labels, rec.scores.len())));
        }
        if let Some((i, v)) = rec.scores.iter().enumerate().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
            return Err(at(format!("score {v} at position {i} outside [0, 1]")));
        }
        if let Some(gt) = &rec.gt {
            if gt.len() != self.n_labels {
                return Err(at(format!("expected {} ground-truth values, got {}", self.n_labels, gt.len())));
            }
        }
        Ok(rec)
    }
}

impl<R: BufRead> Iterator for PredictionReader<R> {
    type Item = Result<PredictionRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line += 1;
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            return Some(self.parse(text));
        }
    }
}

/// Reads all records, failing on the first bad line.
pub fn read_predictions<R: BufRead>(reader: R, n_labels: usize) -> Result<Vec<PredictionRecord>> {
    PredictionReader::new(reader, n_labels).collect()
}

/// Parses a JSON array of per-label average precision values.
pub fn parse_average_precision(text: &str, n_labels: usize) -> Result<Vec<f64>> {
    let ap: Vec<f64> = serde_json::from_str(text).map_err(|e| Error::Input { line: e.line(), message: e.to_string() })?;
    if ap.len() != n_labels {
        return Err(Error::LengthMismatch { expected: n_labels, actual: ap.len() });
    }
    if let Some((index, &value)) = ap.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidScore { index, value });
    }
    Ok(ap)
}
