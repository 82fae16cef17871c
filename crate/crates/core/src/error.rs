//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(
        "inconsistent feature arity: instance {index} has {got} features, expected {expected}"
    )]
    InconsistentArity {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("instances disagree on p_star presence (all or none must carry it)")]
    MixedPstarPresence,
    #[error("instances disagree on y_star presence (all or none must carry it)")]
    MixedYstarPresence,
    #[error("instance {index} has non-positive weight {weight}")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("instance {index} has p_star {value} outside [0, 1]")]
    PstarOutOfRange { index: usize, value: f64 },
    #[error("dataset has no p_star annotations (probabilistic dataset required)")]
    MissingPstar,
    #[error("dataset has no y_star labels (sampled dataset required)")]
    MissingYstar,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("group {group} is empty")]
    EmptyGroup { group: u32 },
    #[error("operation requires exactly two groups, dataset has {count}")]
    NotTwoGroups { count: u32 },
    #[error("unknown preset {name:?}; valid presets: S1, S2, S3, S4, S5")]
    UnknownPreset { name: String },
    #[error("invalid generative spec: {reason}")]
    InvalidGenerativeSpec { reason: String },
    #[error("unknown feature {name:?}")]
    UnknownFeature { name: String },
    #[error("no feature columns remain after drop")]
    NoFeaturesRemain,
    #[error("split fraction {fraction} outside (0, 1)")]
    InvalidFraction { fraction: f64 },
    #[error("split would leave the {side} side empty")]
    EmptySplit { side: &'static str },
    #[error("missing column {name:?} in header")]
    MissingColumn { name: String },
    #[error("row {row}: {reason}")]
    BadRow { row: usize, reason: String },
    #[error("no rows remain after filtering")]
    ZeroRows,
    #[error("spread condition violated: mass {mass} inside the open window exceeds {allowed}")]
    SpreadViolated { mass: f64, allowed: f64 },
    #[error(
        "accuracy target {requested} infeasible; maximum achievable accuracy is {max_accuracy}"
    )]
    InfeasibleAccuracy { requested: f64, max_accuracy: f64 },
    #[error("exhaustive enumeration limited to n <= {max}, dataset has {n}")]
    TooManyInstances { n: usize, max: usize },
    #[error("non-finite feature value at instance {index}, column {column}")]
    NonFiniteFeature { index: usize, column: usize },
    #[error("training diverged: loss increased across a full backtracking sweep")]
    Divergence,
    #[error("unfairness metric undefined at every grid point")]
    MetricUndefined,
    #[error("gamma values must be strictly increasing")]
    GammasNotIncreasing,
    #[error("schema error: {reason}")]
    Schema { reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
