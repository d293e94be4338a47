//! Requirements engine for multi-label classification under propositional
//! constraints.
//!
//! A [`RequirementSet`] is a CNF formula over a [`LabelTable`]. On top of it:
//!
//! - [`admissibility`]: thresholding scores into predictions and measuring
//!   violations over a corpus,
//! - [`sat`]: satisfiability, entailment, redundancy and exact model counting,
//! - [`maxsat`]: minimum-cost repair of non-admissible predictions,
//! - [`fuzzy`]: t-norm relaxation of the requirements as a differentiable
//!   penalty.

pub mod admissibility;
pub mod error;
pub mod fuzzy;
pub mod io;
pub mod labels;
pub mod maxsat;
pub mod requirements;
pub mod sat;

pub use admissibility::{CorpusMetrics, Prediction, ScoreVector, ViolationReport};
pub use error::{Error, ParseError, Result};
pub use labels::{LabelEntry, LabelGroup, LabelTable};
pub use requirements::{Clause, Literal, RequirementSet, RequirementStats};
