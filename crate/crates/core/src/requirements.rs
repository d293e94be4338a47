//! CNF requirements over a label table: parsing, printing, statistics and
//! DIMACS interchange.
//!
//! Requirement files hold one clause per line in set notation:
//!
//! ```text
//! # comment
//! {Ped, not PushObj}
//! {not Red, not Green}
//! ```

use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};
use crate::labels::LabelTable;

/// The shipped road-scene corpus, in requirement-file syntax.
pub const ROAD_R_CORPUS: &str = include_str!("../data/road_r.req");

/// A positive (`A`) or negative (`not A`) label.
///
/// Ordering is by label index, negative before positive; clauses store their
/// literals in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub label: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(label: usize) -> Self {
        Self { label, positive: true }
    }

    pub fn neg(label: usize) -> Self {
        Self { label, positive: false }
    }

    pub fn negated(self) -> Self {
        Self { label: self.label, positive: !self.positive }
    }

    /// Whether the literal holds when `label` takes `value`.
    #[inline]
    pub fn holds(self, value: bool) -> bool {
        value == self.positive
    }
}

/// A nonempty disjunction of literals with no repeated or complementary
/// labels.
#[derive(Debug, Clone)]
pub struct Clause {
    literals: Vec<Literal>,
    source_line: Option<String>,
}

impl PartialEq for Clause {
    fn eq(&self, other: &Self) -> bool {
        self.literals == other.literals
    }
}

impl Eq for Clause {}

impl std::hash::Hash for Clause {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.literals.hash(state);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ClauseDefect {
    Empty,
    Duplicate,
    Tautology,
}

fn canonicalize(mut literals: Vec<Literal>) -> std::result::Result<Vec<Literal>, ClauseDefect> {
    if literals.is_empty() {
        return Err(ClauseDefect::Empty);
    }
    literals.sort_unstable();
    for pair in literals.windows(2) {
        if pair[0] == pair[1] {
            return Err(ClauseDefect::Duplicate);
        }
    }
    // after sorting, a complementary pair is adjacent
    for pair in literals.windows(2) {
        if pair[0].label == pair[1].label {
            return Err(ClauseDefect::Tautology);
        }
    }
    Ok(literals)
}

impl Clause {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self> {
        let literals = canonicalize(literals.into_iter().collect()).map_err(|d| {
            Error::InvalidClause(
                match d {
                    ClauseDefect::Empty => "empty clause",
                    ClauseDefect::Duplicate => "duplicate literal",
                    ClauseDefect::Tautology => "complementary literals",
                }
                .into(),
            )
        })?;
        Ok(Self { literals, source_line: None })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source_line = Some(source.into());
        self
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn source_line(&self) -> Option<&str> {
        self.source_line.as_deref()
    }

    pub fn num_negative(&self) -> usize {
        self.literals.iter().filter(|l| !l.positive).count()
    }

    pub fn num_positive(&self) -> usize {
        self.literals.iter().filter(|l| l.positive).count()
    }

    pub fn mentions(&self, label: usize) -> bool {
        self.literals.iter().any(|l| l.label == label)
    }

    /// Clause value under a total assignment.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.literals.iter().any(|l| l.holds(assignment[l.label]))
    }

    /// Renders the clause in requirement-file syntax.
    pub fn display<'a>(&'a self, table: &'a LabelTable) -> ClauseDisplay<'a> {
        ClauseDisplay { clause: self, table }
    }
}

pub struct ClauseDisplay<'a> {
    clause: &'a Clause,
    table: &'a LabelTable,
}

impl fmt::Display for ClauseDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('{')?;
        for (i, lit) in self.clause.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if !lit.positive {
                f.write_str("not ")?;
            }
            f.write_str(self.table.abbrev(lit.label))?;
        }
        f.write_char('}')
    }
}

/// An ordered set of clauses over a shared label table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequirementSet {
    table: Arc<LabelTable>,
    clauses: Vec<Clause>,
}

impl RequirementSet {
    pub fn new(table: impl Into<Arc<LabelTable>>, clauses: Vec<Clause>) -> Result<Self> {
        let table = table.into();
        for (i, clause) in clauses.iter().enumerate() {
            if let Some(lit) = clause.literals.iter().find(|l| l.label >= table.len()) {
                return Err(Error::InvalidClause(format!(
                    "clause {i} refers to label {} but the table has {} labels",
                    lit.label,
                    table.len()
                )));
            }
        }
        Ok(Self { table, clauses })
    }

    /// The shipped road-scene corpus over the 41-label road table.
    pub fn road_r() -> Self {
        parse_requirements(ROAD_R_CORPUS, Arc::new(LabelTable::road())).expect("shipped corpus parses")
    }

    pub fn label_table(&self) -> &LabelTable {
        &self.table
    }

    pub fn shared_table(&self) -> Arc<LabelTable> {
        Arc::clone(&self.table)
    }

    pub fn num_labels(&self) -> usize {
        self.table.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Copy of the set with clause `index` removed.
    pub fn without(&self, index: usize) -> Self {
        let mut clauses = self.clauses.clone();
        clauses.remove(index);
        Self { table: Arc::clone(&self.table), clauses }
    }

    /// Copy of the set with one more clause appended.
    pub fn with_clause(&self, clause: Clause) -> Result<Self> {
        let mut clauses = self.clauses.clone();
        clauses.push(clause);
        Self::new(Arc::clone(&self.table), clauses)
    }

    /// Serializes in requirement-file syntax; `parse_requirements` inverts it.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for clause in &self.clauses {
            let _ = writeln!(out, "{}", clause.display(&self.table));
        }
        out
    }

    pub fn stats(&self) -> RequirementStats {
        stats(self)
    }

    pub fn to_dimacs(&self) -> String {
        export_dimacs(self)
    }
}

/// Parses a requirements file against `table`.
pub fn parse_requirements(text: &str, table: impl Into<Arc<LabelTable>>) -> Result<RequirementSet, ParseError> {
    let table = table.into();
    let mut clauses = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let inner = content
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| ParseError::Syntax { line, message: "expected a clause of the form {item, item, ...}".into() })?;
        if inner.trim().is_empty() {
            return Err(ParseError::EmptyClause { line });
        }
        let mut literals = Vec::new();
        for item in inner.split(',') {
            let item = item.trim();
            if item.is_empty() {
                return Err(ParseError::Syntax { line, message: "empty item".into() });
            }
            let (positive, abbrev) = match item.strip_prefix("not") {
                Some(rest) if rest.starts_with(char::is_whitespace) => (false, rest.trim_start()),
                _ => (true, item),
            };
            if abbrev.contains(char::is_whitespace) || abbrev.contains(['{', '}']) {
                return Err(ParseError::Syntax { line, message: format!("malformed item `{item}`") });
            }
            let label = table.index_of(abbrev).ok_or_else(|| ParseError::UnknownAbbrev { line, token: abbrev.to_owned() })?;
            literals.push(Literal { label, positive });
        }
        let literals = canonicalize(literals).map_err(|d| match d {
            ClauseDefect::Empty => ParseError::EmptyClause { line },
            ClauseDefect::Duplicate => ParseError::DuplicateLiteral { line },
            ClauseDefect::Tautology => ParseError::TautologicalClause { line },
        })?;
        clauses.push(Clause { literals, source_line: Some(format!("line {line}")) });
    }
    Ok(RequirementSet { table, clauses })
}

/// Clauses of one length and their average literal polarity split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBucket {
    pub length: usize,
    pub count: usize,
    pub avg_negative: f64,
    pub avg_positive: f64,
}

/// Summary statistics of a requirement set.
///
/// A label "occurs" in a clause when the clause contains it with either
/// polarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementStats {
    pub n_labels: usize,
    pub n_clauses: usize,
    pub avg_len: f64,
    pub min_len: usize,
    pub max_len: usize,
    /// Labels appearing as a positive literal somewhere.
    pub n_labels_pos: usize,
    /// Labels appearing as a negative literal somewhere.
    pub n_labels_neg: usize,
    pub min_occurrences: usize,
    pub avg_occurrences: f64,
    pub max_occurrences: usize,
    pub n_all_negative: usize,
    pub n_all_positive: usize,
    pub avg_negative: f64,
    pub avg_positive: f64,
    pub by_length: Vec<LengthBucket>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn stats(rs: &RequirementSet) -> RequirementStats {
    let n_labels = rs.num_labels();
    let mut appears_pos = vec![false; n_labels];
    let mut appears_neg = vec![false; n_labels];
    let mut occurrences = vec![0usize; n_labels];
    // length -> (count, negatives, positives)
    let mut buckets: std::collections::BTreeMap<usize, (usize, usize, usize)> = Default::default();
    let (mut total_len, mut total_neg, mut total_pos) = (0, 0, 0);
    let (mut n_all_negative, mut n_all_positive) = (0, 0);

    for clause in rs.clauses() {
        let neg = clause.num_negative();
        let pos = clause.num_positive();
        for lit in clause.literals() {
            occurrences[lit.label] += 1;
            if lit.positive {
                appears_pos[lit.label] = true;
            } else {
                appears_neg[lit.label] = true;
            }
        }
        let entry = buckets.entry(clause.len()).or_default();
        entry.0 += 1;
        entry.1 += neg;
        entry.2 += pos;
        total_len += clause.len();
        total_neg += neg;
        total_pos += pos;
        n_all_negative += usize::from(pos == 0);
        n_all_positive += usize::from(neg == 0);
    }

    let n_clauses = rs.len();
    RequirementStats {
        n_labels,
        n_clauses,
        avg_len: ratio(total_len, n_clauses),
        min_len: buckets.keys().next().copied().unwrap_or(0),
        max_len: buckets.keys().next_back().copied().unwrap_or(0),
        n_labels_pos: appears_pos.iter().filter(|&&b| b).count(),
        n_labels_neg: appears_neg.iter().filter(|&&b| b).count(),
        min_occurrences: occurrences.iter().copied().min().unwrap_or(0),
        avg_occurrences: ratio(occurrences.iter().sum(), n_labels),
        max_occurrences: occurrences.iter().copied().max().unwrap_or(0),
        n_all_negative,
        n_all_positive,
        avg_negative: ratio(total_neg, n_clauses),
        avg_positive: ratio(total_pos, n_clauses),
        by_length: buckets
            .into_iter()
            .map(|(length, (count, neg, pos))| LengthBucket {
                length,
                count,
                avg_negative: ratio(neg, count),
                avg_positive: ratio(pos, count),
            })
            .collect(),
    }
}

/// DIMACS CNF text: label `i` becomes variable `i + 1`.
pub fn export_dimacs(rs: &RequirementSet) -> String {
    let mut out = String::new();
    for (i, entry) in rs.label_table().entries().iter().enumerate() {
        let _ = writeln!(out, "c {} {}", i + 1, entry.abbrev);
    }
    let _ = writeln!(out, "p cnf {} {}", rs.num_labels(), rs.len());
    for clause in rs.clauses() {
        write_dimacs_clause(&mut out, clause.literals());
    }
    out
}

pub(crate) fn dimacs_lit(lit: Literal) -> i64 {
    let var = lit.label as i64 + 1;
    if lit.positive {
        var
    } else {
        -var
    }
}

pub(crate) fn write_dimacs_clause(out: &mut String, literals: &[Literal]) {
    for lit in literals {
        let _ = write!(out, "{} ", dimacs_lit(*lit));
    }
    out.push_str("0\n");
}

/// Header of a DIMACS CNF file: `(variables, clauses)`.
pub fn dimacs_header(text: &str) -> Option<(usize, usize)> {
    text.lines().map(str::trim).find(|l| l.starts_with("p ")).and_then(|l| {
        let mut parts = l.split_whitespace().skip(1);
        if parts.next()? != "cnf" {
            return None;
        }
        Some((parts.next()?.parse().ok()?, parts.next()?.parse().ok()?))
    })
}

/// Reads DIMACS CNF against a label table whose size matches the header.
pub fn parse_dimacs(text: &str, table: impl Into<Arc<LabelTable>>) -> Result<RequirementSet, ParseError> {
    let table = table.into();
    let mut header = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    let mut clause_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('c') || content.starts_with('%') {
            continue;
        }
        if content.starts_with('p') {
            let (vars, n) = dimacs_header(content).ok_or_else(|| ParseError::Syntax { line, message: "malformed problem line".into() })?;
            if vars != table.len() {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("header declares {vars} variables, label table has {}", table.len()),
                });
            }
            header = Some(n);
            continue;
        }
        if header.is_none() {
            return Err(ParseError::Syntax { line, message: "clause before problem line".into() });
        }
        for token in content.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| ParseError::Syntax { line, message: format!("bad literal `{token}`") })?;
            if current.is_empty() {
                clause_line = line;
            }
            if value == 0 {
                let literals = canonicalize(std::mem::take(&mut current)).map_err(|d| match d {
                    ClauseDefect::Empty => ParseError::EmptyClause { line },
                    ClauseDefect::Duplicate => ParseError::DuplicateLiteral { line: clause_line },
                    ClauseDefect::Tautology => ParseError::TautologicalClause { line: clause_line },
                })?;
                clauses.push(Clause { literals, source_line: Some(format!("line {clause_line}")) });
                continue;
            }
            let var = value.unsigned_abs() as usize;
            if var > table.len() {
                return Err(ParseError::UnknownAbbrev { line, token: token.to_owned() });
            }
            current.push(Literal { label: var - 1, positive: value > 0 });
        }
    }
    if !current.is_empty() {
        return Err(ParseError::Syntax { line: clause_line, message: "unterminated clause".into() });
    }
    match header {
        Some(n) if n != clauses.len() => {
            Err(ParseError::Syntax { line: 0, message: format!("header declares {n} clauses, found {}", clauses.len()) })
        }
        Some(_) => Ok(RequirementSet { table, clauses }),
        None => Err(ParseError::Syntax { line: 0, message: "missing problem line".into() }),
    }
}
