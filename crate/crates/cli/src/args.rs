use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use roadreq::fuzzy::{Reduction, TNorm};
use roadreq::maxsat::CorrectionPolicy;

const ABOUT: &str = "Check, measure, repair and relax multi-label predictions under propositional requirements.";

const LONG_ABOUT: &str = "\
Check, measure, repair and relax multi-label predictions under propositional requirements.

REQUIREMENTS FILES
  One clause per line in set notation, literals separated by commas, a
  leading `not` for negation. `#` starts a comment; blank lines are ignored.

      {Ped, not PushObj}
      {not Red, not Green}

  Files ending in `.cnf`, or starting with a `p cnf` header, are read as
  DIMACS CNF. A 41-variable DIMACS file uses the shipped label table, any
  other size gets labels L0..L(n-1). Without --requirements the shipped
  corpus (243 clauses over 41 labels) is used.

PREDICTIONS (JSON Lines, `-` reads stdin)
  {\"id\": \"frame1/box3\", \"scores\": [41 numbers in [0,1]], \"gt\": [41 booleans]}
  `id` and `gt` are optional; `validate` needs `gt`. Correction output
  (`adjusted_scores`) is accepted in place of `scores`.

AVERAGE PRECISION (--ap)
  A JSON array with one value in [0,1] per label.

OUTPUT
  correct:  {\"id\", \"flipped\": [labels], \"cost\", \"adjusted_scores\": [...]} per line
  loss:     {\"id\", \"loss\", \"grad\": [...]} per line
  Summaries go to stderr for these two; other commands write a single report.

EXIT CODES
  0 success, 1 violations / redundancy / infeasible items found, 2 input error.

ENVIRONMENT
  ROADREQ_THREADS caps the worker pool.";

#[derive(Debug, Parser)]
#[command(name = "roadreq", version, about = ABOUT, long_about = LONG_ABOUT)]
pub struct Cli {
    /// Worker threads for per-item work
    #[arg(long, global = true, env = "ROADREQ_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clause, label and polarity statistics of a requirement set
    Stats(Common),
    /// Check that every ground-truth assignment satisfies the requirements
    Validate(WithPredictions),
    /// Violation metrics of thresholded predictions over a sweep of thresholds
    Metrics(MetricsArgs),
    /// Repair non-admissible predictions with a minimum-cost set of flips
    Correct(CorrectArgs),
    /// Exact number of admissible predictions
    Count(Common),
    /// List clauses entailed by the remaining ones
    CheckRedundant(Common),
    /// Fuzzy constraint penalty and its gradient per prediction
    Loss(LossArgs),
    /// Write the requirements as DIMACS CNF
    ExportDimacs(Common),
    /// Write the correction problem of one prediction as weighted DIMACS
    ExportWcnf(WcnfArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Requirements file (defaults to the shipped corpus)
    #[arg(long)]
    pub requirements: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WithPredictions {
    #[command(flatten)]
    pub common: Common,
    /// Predictions file, JSON Lines
    #[arg(long)]
    pub predictions: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub input: WithPredictions,
    /// Single threshold; overrides --thetas
    #[arg(long, value_parser = unit_interval)]
    pub theta: Option<f64>,
    /// Comma-separated thresholds (default 0.1,0.2,...,0.9)
    #[arg(long, value_delimiter = ',', value_parser = unit_interval)]
    pub thetas: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    #[command(flatten)]
    pub input: WithPredictions,
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    pub theta: f64,
    /// Flip cost policy
    #[arg(long, default_value = "md", value_parser = parse_policy)]
    pub policy: CorrectionPolicy,
    /// Per-label average precision, required by ap and apo
    #[arg(long)]
    pub ap: Option<PathBuf>,
    /// Distance from the threshold for flipped scores
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub epsilon: f64,
    /// Reject items whose optimal cost exceeds this
    #[arg(long, value_parser = positive)]
    pub budget: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[command(flatten)]
    pub input: WithPredictions,
    #[arg(long, default_value = "product", value_parser = parse_tnorm)]
    pub tnorm: TNorm,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub alpha: f64,
    /// Aggregate item losses by sum or mean
    #[arg(long, value_enum, default_value_t = ReductionArg::Sum)]
    pub reduction: ReductionArg,
    /// Evaluate product clauses in log space
    #[arg(long)]
    pub log_space: bool,
    /// Compare analytic gradients with central finite differences
    #[arg(long)]
    pub grad_check: bool,
    /// Finite-difference step for --grad-check
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReductionArg {
    Sum,
    Mean,
}

impl From<ReductionArg> for Reduction {
    fn from(r: ReductionArg) -> Self {
        match r {
            ReductionArg::Sum => Reduction::Sum,
            ReductionArg::Mean => Reduction::Mean,
        }
    }
}

#[derive(Debug, Args)]
pub struct WcnfArgs {
    #[command(flatten)]
    pub input: WithPredictions,
    /// Record to export, by id or zero-based position (default: first)
    #[arg(long)]
    pub item: Option<String>,
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    pub theta: f64,
    #[arg(long, default_value = "md", value_parser = parse_policy)]
    pub policy: CorrectionPolicy,
    #[arg(long)]
    pub ap: Option<PathBuf>,
    /// Soft weights are multiplied by this and rounded
    #[arg(long, default_value_t = 1000.0, value_parser = positive)]
    pub scale: f64,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn parse_policy(s: &str) -> Result<CorrectionPolicy, String> {
    s.parse().map_err(|e: roadreq::Error| e.to_string())
}

fn parse_tnorm(s: &str) -> Result<TNorm, String> {
    s.parse().map_err(|e: roadreq::Error| e.to_string())
}
