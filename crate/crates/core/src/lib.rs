//! Observational information for retrieval evaluation and rank fusion.
//!
//! Documents are scored by a set of signals (system runs and the gold
//! standard). The information quantity of a document measures how rarely it
//! is unanimously outscored; its mean over the collection is the
//! observational entropy. On top of that the crate provides the OIE metric,
//! classical metrics, constraint checking, Metric Unanimity, OIQ and Borda
//! fusion, synthetic experiments and TREC/CSV I/O.

pub mod constraints;
pub mod error;
pub mod experiments;
pub mod fusion;
pub mod meta;
pub mod metrics;
pub mod oiq;
pub mod report;
pub mod trec;
pub mod types;

pub use constraints::{check_metric, Constraint, ConstraintReport, ConstraintSuite, SuiteParams};
pub use error::{Error, Result};
pub use experiments::{Dataset, SynthConfig, TrialRecord};
pub use fusion::{FusionKind, FusionMethod, FusionRun};
pub use meta::{metric_unanimity, mu_ranking, MUReport, MuMode};
pub use metrics::{evaluate_batch, oie, MetricId, MetricReport, OieParams};
pub use oiq::{entropy, joint_entropy, oiq, outscores, OiqTable};
pub use types::{Collection, DocId, GoldStandard, RankedList, RunId, Signal, SignalSet, TopicId};
