use thiserror::Error;

use crate::metrics::Metric;

/// Quantity whose vanishing leaves a metric undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VanishingQuantity {
    NonProtectedExposure,
    NonProtectedClickThrough,
    ProtectedMeanRelevance,
    NonProtectedMeanRelevance,
}

impl std::fmt::Display for VanishingQuantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VanishingQuantity::NonProtectedExposure => "Exposure(G0|r) = 0",
            VanishingQuantity::NonProtectedClickThrough => "CTR(G0|r) = 0",
            VanishingQuantity::ProtectedMeanRelevance => "Y(G1) = 0",
            VanishingQuantity::NonProtectedMeanRelevance => "Y(G0) = 0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("position {position} out of range for ranking of length {len}")]
    Position { position: usize, len: usize },

    #[error("candidate `{0}` is already part of the candidate set")]
    Duplicate(String),

    #[error("candidate `{0}` is not a member of the population")]
    Membership(String),

    #[error("invalid candidate `{id}`: {reason}")]
    InvalidCandidate { id: String, reason: String },

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("invalid candidate set: {0}")]
    InvalidCandidateSet(String),

    #[error("divergence undefined: p[{index}] > 0 while q[{index}] = 0")]
    DivergenceDomain { index: usize },

    #[error("not a probability vector: {0}")]
    Normalization(String),

    #[error("{metric} is undefined on this ranking: {quantity}")]
    UndefinedMetric {
        metric: Metric,
        quantity: VanishingQuantity,
    },

    #[error("{metric} normalizer is zero: every ranking of the candidate set scores 0")]
    NormalizerZero { metric: Metric },

    #[error("{metric} is not applicable: {reason}")]
    NotApplicable { metric: Metric, reason: String },

    #[error("invalid cutoffs: {0}")]
    Cutoff(String),

    #[error("candidate set of size {n} exceeds the enumeration guard of {max}")]
    SizeGuard { n: usize, max: usize },

    #[error("population too small: {0}")]
    Capacity(String),

    #[error("undefined on ranking [{}]: {source}", order.join(", "))]
    UndefinedOnRanking {
        order: Vec<String>,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: {reason}")]
    Validation { line: u64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that signal an ill-defined metric value rather than misuse.
    pub fn is_undefined_metric(&self) -> bool {
        match self {
            Error::UndefinedMetric { .. } => true,
            Error::UndefinedOnRanking { source, .. } => source.is_undefined_metric(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
