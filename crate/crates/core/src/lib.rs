//! Decision-support toolkit for triaging child-health case files.
//!
//! The crate covers the full path from raw multi-file case exports to a
//! served, retrainable classifier:
//!
//! - [`corpus`]: ingest, validate, de-identify and export case files.
//! - [`textprep`]: normalize consult notes into term sequences (acronym
//!   expansion, trivial-word removal, stopword filtering with negation
//!   retention, Dutch stemming, n-grams).
//! - [`vectorize`]: vocabularies, five term-weighting schemes, univariate
//!   feature scoring and the assembled sparse feature matrix.
//! - [`explore`]: k-means clustering with elbow reports and Mann-Whitney
//!   screening of summarizing features.
//! - [`learn`]: from-scratch Naive Bayes, random forest and kernel SVM,
//!   plus the two-member soft-voting ensemble.
//! - [`eval`]: the undersampling split protocol, repeated-split cross
//!   validation, threshold metrics, ROC/AUC and grid search.
//! - [`pipeline`]: declarative configs tying the stages into trainable,
//!   serializable model artifacts.
//! - [`synthgen`]: deterministic synthetic corpora with planted signal for
//!   end-to-end verification.

pub mod corpus;
pub mod eval;
pub mod explore;
pub mod learn;
pub mod pipeline;
pub mod synthgen;
pub mod textprep;
pub mod vectorize;

mod error;

pub use error::{Error, Result};
