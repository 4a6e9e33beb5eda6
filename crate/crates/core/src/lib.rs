//! Quantitative, interval-based definitions of qualitatively described text
//! levels (CEFR A1–C2).
//!
//! The pipeline runs in stages, one module each:
//!
//! * [`textmetrics`] turns raw text into a descriptor vector (readability
//!   scores plus lexical, syntactic and discourse features).
//! * [`corpus`] loads labeled corpora, splits them and builds feature matrices.
//! * [`dtree`] fits a depth- and support-constrained CART classifier.
//! * [`rules`] compiles the tree into per-level interval definitions.
//! * [`dlgen`] writes those definitions as an OWL Manchester-syntax ontology
//!   and parses them back.
//! * [`eval`] scores predictions (accuracy, ordinal MAE, confusion matrix).
//!
//! [`fixture`] generates the synthetic graded corpus used by the end-to-end
//! checks.

pub mod corpus;
pub mod dlgen;
pub mod dtree;
mod error;
pub mod eval;
pub mod fixture;
pub mod rules;
pub mod textmetrics;

pub use corpus::{FeatureMatrix, LabeledCorpus, LevelLabel};
pub use dtree::{DecisionTree, TrainConfig};
pub use error::{Error, Result};
pub use rules::{DefinitionMode, DefinitionSet};
pub use textmetrics::{Document, FeatureCatalog, FeatureVector};
