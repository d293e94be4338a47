//! Report types and their JSON / CSV encodings.
//!
//! Every report parses back from the text it writes. CSV has no nesting, so
//! list-valued fields become `;`-joined strings.

use std::io::Write;

use anyhow::{Context, Result};
use roadreq::admissibility::SweepRow;
use roadreq::io::{CorrectionRecord, LossRecord};
use roadreq::maxsat::Infeasible;
use roadreq::requirements::LengthBucket;
use roadreq::sat::CountStats;
use roadreq::CorpusMetrics;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::args::Format;

pub fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

pub fn split<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(|x| x.parse::<T>().with_context(|| format!("bad list item `{x}`"))).collect()
}

/// One row of the per-length table, plus a final `all` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsCsvRow {
    pub length: String,
    pub count: usize,
    pub avg_negative: f64,
    pub avg_positive: f64,
}

impl From<&LengthBucket> for StatsCsvRow {
    fn from(b: &LengthBucket) -> Self {
        Self { length: b.length.to_string(), count: b.count, avg_negative: b.avg_negative, avg_positive: b.avg_positive }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsCsvRow {
    pub theta: f64,
    pub pct_nonadmissible: f64,
    pub avg_violations: f64,
    pub pct_constraints_violated: f64,
}

impl From<&SweepRow> for MetricsCsvRow {
    fn from(r: &SweepRow) -> Self {
        Self {
            theta: r.theta,
            pct_nonadmissible: r.metrics.pct_nonadmissible,
            avg_violations: r.metrics.avg_violations,
            pct_constraints_violated: r.metrics.pct_constraints_violated,
        }
    }
}

impl From<MetricsCsvRow> for SweepRow {
    fn from(r: MetricsCsvRow) -> Self {
        SweepRow {
            theta: r.theta,
            metrics: CorpusMetrics {
                pct_nonadmissible: r.pct_nonadmissible,
                avg_violations: r.avg_violations,
                pct_constraints_violated: r.pct_constraints_violated,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub count: roadreq::sat::ModelCount,
    pub n_labels: usize,
    pub n_clauses: usize,
    pub elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stats: Option<CountStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountCsvRow {
    pub count: String,
    pub n_labels: usize,
    pub n_clauses: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseRef {
    /// Zero-based position in the requirements file.
    pub index: usize,
    pub clause: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedundancyReport {
    pub n_clauses: usize,
    pub redundant: Vec<ClauseRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offender {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub id: Option<String>,
    /// Zero-based record position.
    pub record: usize,
    pub violated: Vec<ClauseRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub n_items: usize,
    pub n_inadmissible: usize,
    pub offenders: Vec<Offender>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateCsvRow {
    pub id: Option<String>,
    pub record: usize,
    pub clause_index: usize,
    pub clause: String,
}

/// One line of `correct` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorrectionLine {
    Corrected(CorrectionRecord),
    Infeasible {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        id: Option<String>,
        infeasible: Infeasible,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionCsvRow {
    pub id: Option<String>,
    pub status: String,
    pub flipped: String,
    pub cost: Option<f64>,
    pub adjusted_scores: String,
}

impl From<&CorrectionLine> for CorrectionCsvRow {
    fn from(line: &CorrectionLine) -> Self {
        match line {
            CorrectionLine::Corrected(r) => Self {
                id: r.id.clone(),
                status: "ok".into(),
                flipped: join(&r.flipped),
                cost: Some(r.cost),
                adjusted_scores: join(&r.adjusted_scores),
            },
            CorrectionLine::Infeasible { id, infeasible } => Self {
                id: id.clone(),
                status: match infeasible {
                    Infeasible::Unsatisfiable => "unsatisfiable".into(),
                    Infeasible::OverBudget { .. } => "over_budget".into(),
                },
                flipped: String::new(),
                cost: match infeasible {
                    Infeasible::OverBudget { optimum, .. } => Some(*optimum),
                    Infeasible::Unsatisfiable => None,
                },
                adjusted_scores: String::new(),
            },
        }
    }
}

impl CorrectionCsvRow {
    /// Feasible rows only; infeasible rows carry too little to rebuild.
    pub fn to_record(&self) -> Result<Option<CorrectionRecord>> {
        if self.status != "ok" {
            return Ok(None);
        }
        Ok(Some(CorrectionRecord {
            id: self.id.clone(),
            flipped: split(&self.flipped)?,
            cost: self.cost.context("missing cost")?,
            adjusted_scores: split(&self.adjusted_scores)?,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectSummary {
    pub n_items: usize,
    pub n_corrected: usize,
    pub n_infeasible: usize,
    pub total_flips: usize,
    pub mean_cost: f64,
    pub mean_flips: f64,
    pub median_item_ms: f64,
    pub mean_item_ms: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossCsvRow {
    pub id: Option<String>,
    pub loss: f64,
    pub grad: String,
}

impl From<&LossRecord> for LossCsvRow {
    fn from(r: &LossRecord) -> Self {
        Self { id: r.id.clone(), loss: r.loss, grad: join(&r.grad) }
    }
}

impl LossCsvRow {
    pub fn to_record(&self) -> Result<LossRecord> {
        Ok(LossRecord { id: self.id.clone(), loss: self.loss, grad: split(&self.grad)? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub n_items: usize,
    pub tnorm: roadreq::fuzzy::TNorm,
    pub alpha: f64,
    pub reduction: roadreq::fuzzy::Reduction,
    pub total: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_grad_discrepancy: Option<f64>,
}

/// Writes a pretty JSON document followed by a newline.
pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_jsonl<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_csv<T: Serialize>(out: &mut dyn Write, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report<T: Serialize, R: Serialize>(
    out: &mut dyn Write,
    format: Format,
    value: &T,
    rows: impl IntoIterator<Item = R>,
) -> Result<()> {
    match format {
        Format::Json => write_json(out, value),
        Format::Csv => write_csv(out, rows),
    }
}

pub fn read_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().map(|r| r.map_err(Into::into)).collect()
}

/// Per-item output: JSON Lines or CSV rows.
pub enum Sink {
    Json(Box<dyn Write>),
    Csv(Box<csv::Writer<Box<dyn Write>>>),
}

impl Sink {
    pub fn new(out: Box<dyn Write>, format: Format) -> Self {
        match format {
            Format::Json => Sink::Json(out),
            Format::Csv => Sink::Csv(Box::new(csv::Writer::from_writer(out))),
        }
    }

    pub fn emit<J: Serialize, C: Serialize>(&mut self, json: &J, row: impl FnOnce() -> C) -> Result<()> {
        match self {
            Sink::Json(out) => write_jsonl(out, json),
            Sink::Csv(w) => Ok(w.serialize(row())?),
        }
    }

    pub fn finish(self) -> Result<()> {
        match self {
            Sink::Json(mut out) => out.flush()?,
            Sink::Csv(mut w) => w.flush()?,
        }
        Ok(())
    }
}
