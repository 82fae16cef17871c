//! Quantifying how far a binary classifier strays from single-threshold
//! decisions on true outcome probabilities, and what that costs.
//!
//! The crate works over finite weighted datasets where each instance may
//! carry its true outcome probability. It provides:
//!
//! - [`dataset`]: the data model, fair-label derivation, CSV ingestion
//!   and the canonical dump format.
//! - [`metrics`]: exact accuracy, infra-marginality, l1 distance, and
//!   group-fairness measures.
//! - [`theory`]: executable verifiers for the accuracy bound, its
//!   group-wise form, and the two smoothness/spread bounds on delta.
//! - [`optimize`]: exact accuracy maximization under an
//!   infra-marginality budget via the Lagrangian dual, with an
//!   exhaustive oracle.
//! - [`simgen`]: Gaussian generative sampling with exact Bayes
//!   posteriors and the calibrated S1-S5 presets.
//! - [`model`]: logistic probability estimation and the group-threshold
//!   trade-off trainer behind the sweep and ablation experiments.

pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod optimize;
pub mod rng;
pub mod simgen;
pub mod theory;

pub use dataset::{FairLabeling, Instance, LabeledDataset};
pub use error::{Error, Result};
pub use metrics::{DecisionVector, MetricsReport};
pub use optimize::ConstrainedSolution;
pub use simgen::{GenerativeSpec, PresetName};
