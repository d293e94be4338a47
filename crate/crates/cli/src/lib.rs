//! Command-line front end for the `roadreq` engine.
//!
//! [`run`] executes a parsed [`Cli`] and reports an [`Outcome`]; any `Err`
//! it returns is an input problem (exit code 2).

pub mod args;
pub mod report;

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use roadreq::admissibility::{check, default_thetas, SweepAccumulator};
use roadreq::fuzzy::{finite_difference_gradient, loss, LossConfig, SubgradientRule};
use roadreq::io::{parse_average_precision, CorrectionRecord, LossRecord, PredictionReader, PredictionRecord};
use roadreq::maxsat::{compute_weights, correct_item, export_wcnf, CorrectionConfig, CorrectionPolicy, FlipSummary};
use roadreq::requirements::{dimacs_header, parse_dimacs, parse_requirements};
use roadreq::sat::{find_redundant, ModelCounter};
use roadreq::{LabelTable, RequirementSet, ScoreVector};

pub use args::{Cli, Command, Format};
use args::{Common, CorrectArgs, LossArgs, MetricsArgs, WcnfArgs, WithPredictions};
use report::*;

/// Records handed to the worker pool at a time.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Violations, redundancy or infeasible items were found.
    Failure,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Failure => 1,
        }
    }

    fn from_ok(ok: bool) -> Self {
        if ok {
            Outcome::Success
        } else {
            Outcome::Failure
        }
    }
}

/// Loads requirements from `path`, or the shipped corpus.
pub fn load_requirements(path: Option<&Path>) -> Result<RequirementSet> {
    let Some(path) = path else {
        return Ok(RequirementSet::road_r());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_cnf = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("cnf")) || dimacs_header(&text).is_some();
    let rs = if is_cnf {
        let (n, _) = dimacs_header(&text).with_context(|| format!("{}: missing `p cnf` header", path.display()))?;
        let table = if n == 41 { LabelTable::road() } else { LabelTable::synthetic(n) };
        parse_dimacs(&text, table)
    } else {
        parse_requirements(&text, LabelTable::road())
    };
    rs.with_context(|| format!("parsing {}", path.display()))
}

fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Box::new(BufReader::new(f)))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn records(path: &Path, n_labels: usize) -> Result<PredictionReader<Box<dyn BufRead>>> {
    Ok(PredictionReader::new(open_input(path)?, n_labels))
}

/// Feeds records to `f` in chunks of [`CHUNK`], in input order.
fn for_each_chunk(input: &WithPredictions, n_labels: usize, mut f: impl FnMut(usize, Vec<PredictionRecord>) -> Result<()>) -> Result<()> {
    let path = &input.predictions;
    let mut reader = records(path, n_labels)?;
    let mut offset = 0;
    loop {
        let chunk =
            reader.by_ref().take(CHUNK).collect::<roadreq::Result<Vec<_>>>().with_context(|| format!("reading {}", path.display()))?;
        if chunk.is_empty() {
            return Ok(());
        }
        let len = chunk.len();
        f(offset, chunk)?;
        offset += len;
    }
}

fn load_ap(path: Option<&Path>, policy: CorrectionPolicy, n_labels: usize) -> Result<Option<Vec<f64>>> {
    match (path, policy) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(Some(parse_average_precision(&text, n_labels).with_context(|| format!("parsing {}", p.display()))?))
        }
        (None, CorrectionPolicy::Md) => Ok(None),
        (None, other) => bail!("--policy {other} needs --ap"),
    }
}

fn clause_ref(rs: &RequirementSet, index: usize) -> ClauseRef {
    ClauseRef { index, clause: rs.clauses()[index].display(rs.label_table()).to_string() }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Stats(a) => cmd_stats(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Metrics(a) => cmd_metrics(&a),
        Command::Correct(a) => cmd_correct(&a),
        Command::Count(a) => cmd_count(&a),
        Command::CheckRedundant(a) => cmd_check_redundant(&a),
        Command::Loss(a) => cmd_loss(&a),
        Command::ExportDimacs(a) => cmd_export_dimacs(&a),
        Command::ExportWcnf(a) => cmd_export_wcnf(&a),
    }
}

pub fn cmd_stats(a: &Common) -> Result<Outcome> {
    let rs = load_requirements(a.requirements.as_deref())?;
    let stats = rs.stats();
    let mut rows: Vec<StatsCsvRow> = stats.by_length.iter().map(StatsCsvRow::from).collect();
    rows.push(StatsCsvRow {
        length: "all".into(),
        count: stats.n_clauses,
        avg_negative: stats.avg_negative,
        avg_positive: stats.avg_positive,
    });
    let mut out = open_output(a.output.as_deref())?;
    write_report(&mut out, a.format, &stats, rows)?;
    out.flush()?;
    Ok(Outcome::Success)
}

pub fn cmd_validate(a: &WithPredictions) -> Result<Outcome> {
    let rs = load_requirements(a.common.requirements.as_deref())?;
    let mut report = ValidateReport { n_items: 0, n_inadmissible: 0, offenders: Vec::new() };
    for_each_chunk(a, rs.num_labels(), |offset, chunk| {
        for (k, rec) in chunk.into_iter().enumerate() {
            let Some(gt) = rec.ground_truth() else {
                bail!("record {} has no `gt` field", offset + k);
            };
            report.n_items += 1;
            let v = check(&rs, &gt);
            if !v.is_admissible() {
                report.n_inadmissible += 1;
                report.offenders.push(Offender {
                    id: rec.id,
                    record: offset + k,
                    violated: v.violated.iter().map(|&i| clause_ref(&rs, i)).collect(),
                });
            }
        }
        Ok(())
    })?;
    let rows: Vec<ValidateCsvRow> = report
        .offenders
        .iter()
        .flat_map(|o| {
            o.violated.iter().map(|c| ValidateCsvRow {
                id: o.id.clone(),
                record: o.record,
                clause_index: c.index,
                clause: c.clause.clone(),
            })
        })
        .collect();
    let mut out = open_output(a.common.output.as_deref())?;
    write_report(&mut out, a.common.format, &report, rows)?;
    out.flush()?;
    Ok(Outcome::from_ok(report.n_inadmissible == 0))
}

pub fn cmd_metrics(a: &MetricsArgs) -> Result<Outcome> {
    let rs = load_requirements(a.input.common.requirements.as_deref())?;
    let thetas = match (a.theta, a.thetas.is_empty()) {
        (Some(t), _) => vec![t],
        (None, true) => default_thetas(),
        (None, false) => a.thetas.clone(),
    };
    let mut sweep = SweepAccumulator::new(thetas.clone(), rs.len())?;
    for_each_chunk(&a.input, rs.num_labels(), |_, chunk| {
        let part = chunk
            .par_iter()
            .try_fold(
                || SweepAccumulator::new(thetas.clone(), rs.len()).expect("thetas validated"),
                |mut acc, rec| {
                    acc.add(&rs, &rec.score_vector()?)?;
                    Ok::<_, roadreq::Error>(acc)
                },
            )
            .try_reduce(
                || SweepAccumulator::new(thetas.clone(), rs.len()).expect("thetas validated"),
                |mut x, y| {
                    x.merge(&y);
                    Ok(x)
                },
            )?;
        sweep.merge(&part);
        Ok(())
    })?;
    let rows = sweep.finish().context("no predictions")?;
    let mut out = open_output(a.input.common.output.as_deref())?;
    write_report(&mut out, a.input.common.format, &rows, rows.iter().map(MetricsCsvRow::from))?;
    out.flush()?;
    Ok(Outcome::Success)
}

pub fn cmd_correct(a: &CorrectArgs) -> Result<Outcome> {
    let rs = load_requirements(a.input.common.requirements.as_deref())?;
    let ap = load_ap(a.ap.as_deref(), a.policy, rs.num_labels())?;
    let cfg = CorrectionConfig { theta: a.theta, policy: a.policy, epsilon: a.epsilon, budget: a.budget };
    let mut sink = Sink::new(open_output(a.input.common.output.as_deref())?, a.input.common.format);
    let mut summary = FlipSummary::default();
    let mut times = Vec::new();
    let wall = Instant::now();
    for_each_chunk(&a.input, rs.num_labels(), |_, chunk| {
        let results = chunk
            .par_iter()
            .map(|rec| {
                let sv = rec.score_vector()?;
                let t = Instant::now();
                let r = correct_item(&rs, &sv, ap.as_deref(), &cfg)?;
                Ok((r, ms(t)))
            })
            .collect::<roadreq::Result<Vec<_>>>()?;
        for ((r, t), rec) in results.into_iter().zip(&chunk) {
            summary.add(&r);
            times.push(t);
            let line = match &r {
                Ok(c) => CorrectionLine::Corrected(CorrectionRecord::from(c)),
                Err(e) => CorrectionLine::Infeasible { id: rec.id.clone(), infeasible: *e },
            };
            sink.emit(&line, || CorrectionCsvRow::from(&line))?;
        }
        Ok(())
    })?;
    sink.finish()?;
    times.sort_by(f64::total_cmp);
    let n = times.len();
    let report = CorrectSummary {
        n_items: summary.n_items,
        n_corrected: summary.n_corrected,
        n_infeasible: summary.n_infeasible,
        total_flips: summary.total_flips,
        mean_cost: summary.mean_cost(),
        mean_flips: summary.mean_flips(),
        median_item_ms: if n == 0 {
            0.0
        } else if n % 2 == 1 {
            times[n / 2]
        } else {
            (times[n / 2 - 1] + times[n / 2]) / 2.0
        },
        mean_item_ms: if n == 0 { 0.0 } else { times.iter().sum::<f64>() / n as f64 },
        wall_ms: ms(wall),
    };
    write_json(&mut io::stderr().lock(), &report)?;
    Ok(Outcome::from_ok(summary.n_infeasible == 0))
}

pub fn cmd_count(a: &Common) -> Result<Outcome> {
    let rs = load_requirements(a.requirements.as_deref())?;
    let t = Instant::now();
    let mut counter = ModelCounter::new();
    let count = counter.count(&rs);
    let report = CountReport { count, n_labels: rs.num_labels(), n_clauses: rs.len(), elapsed_ms: ms(t), stats: Some(counter.stats()) };
    let row = CountCsvRow {
        count: report.count.to_string(),
        n_labels: report.n_labels,
        n_clauses: report.n_clauses,
        elapsed_ms: report.elapsed_ms,
    };
    let mut out = open_output(a.output.as_deref())?;
    write_report(&mut out, a.format, &report, [row])?;
    out.flush()?;
    Ok(Outcome::Success)
}

pub fn cmd_check_redundant(a: &Common) -> Result<Outcome> {
    let rs = load_requirements(a.requirements.as_deref())?;
    let redundant: Vec<ClauseRef> = find_redundant(&rs).into_iter().map(|i| clause_ref(&rs, i)).collect();
    let report = RedundancyReport { n_clauses: rs.len(), redundant };
    let mut out = open_output(a.output.as_deref())?;
    write_report(&mut out, a.format, &report, report.redundant.iter())?;
    out.flush()?;
    Ok(Outcome::from_ok(report.redundant.is_empty()))
}

pub fn cmd_loss(a: &LossArgs) -> Result<Outcome> {
    let rs = load_requirements(a.input.common.requirements.as_deref())?;
    let cfg = LossConfig {
        tnorm: a.tnorm,
        alpha: a.alpha,
        subgradient_rule: SubgradientRule::FirstArgmax,
        log_space: a.log_space,
        reduction: a.reduction.into(),
    };
    cfg.validate()?;
    let mut sink = Sink::new(open_output(a.input.common.output.as_deref())?, a.input.common.format);
    let mut n_items = 0usize;
    let mut total = 0.0;
    let mut max_disc: f64 = 0.0;
    for_each_chunk(&a.input, rs.num_labels(), |_, chunk| {
        let results = chunk
            .par_iter()
            .map(|rec| {
                let sv: ScoreVector = rec.score_vector()?;
                let r = loss(&rs, &sv, &cfg)?;
                let disc = a.grad_check.then(|| {
                    let fd = finite_difference_gradient(&rs, sv.scores(), &cfg, a.step);
                    fd.iter().zip(&r.gradient).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
                });
                Ok((LossRecord::new(rec.id.clone(), &r), disc))
            })
            .collect::<roadreq::Result<Vec<_>>>()?;
        for (rec, disc) in results {
            n_items += 1;
            total += rec.loss;
            if let Some(d) = disc {
                max_disc = max_disc.max(d);
            }
            sink.emit(&rec, || LossCsvRow::from(&rec))?;
        }
        Ok(())
    })?;
    sink.finish()?;
    if n_items == 0 {
        bail!("no predictions");
    }
    if cfg.reduction == roadreq::fuzzy::Reduction::Mean {
        total /= n_items as f64;
    }
    let summary = LossSummary {
        n_items,
        tnorm: cfg.tnorm,
        alpha: cfg.alpha,
        reduction: cfg.reduction,
        total,
        max_grad_discrepancy: a.grad_check.then_some(max_disc),
    };
    write_json(&mut io::stderr().lock(), &summary)?;
    Ok(Outcome::Success)
}

pub fn cmd_export_dimacs(a: &Common) -> Result<Outcome> {
    let rs = load_requirements(a.requirements.as_deref())?;
    let mut out = open_output(a.output.as_deref())?;
    out.write_all(rs.to_dimacs().as_bytes())?;
    out.flush()?;
    Ok(Outcome::Success)
}

pub fn cmd_export_wcnf(a: &WcnfArgs) -> Result<Outcome> {
    let rs = load_requirements(a.input.common.requirements.as_deref())?;
    let ap = load_ap(a.ap.as_deref(), a.policy, rs.num_labels())?;
    let mut found = None;
    for (pos, rec) in records(&a.input.predictions, rs.num_labels())?.enumerate() {
        let rec = rec.with_context(|| format!("reading {}", a.input.predictions.display()))?;
        let hit = match &a.item {
            None => true,
            Some(key) => rec.id.as_deref() == Some(key.as_str()) || key.parse::<usize>() == Ok(pos),
        };
        if hit {
            found = Some(rec);
            break;
        }
    }
    let Some(rec) = found else {
        bail!("no matching record in {}", a.input.predictions.display());
    };
    let sv = rec.score_vector()?;
    let p = roadreq::admissibility::threshold(&sv, a.theta)?;
    let w = compute_weights(a.policy, &sv, ap.as_deref(), a.theta)?;
    let mut out = open_output(a.input.common.output.as_deref())?;
    out.write_all(export_wcnf(&rs, &p, &w, a.scale).as_bytes())?;
    out.flush()?;
    Ok(Outcome::Success)
}
