//! Group-fairness metrics for rankings.
//!
//! `rankfair` implements eleven group-fairness metrics (rND, rRD, rKL, ED, ER,
//! DTD, DTR, DID, DIR, AWRF and PSP), thirteen axiomatic property checkers,
//! generators for the ranking families those checkers search, brute-force
//! oracles, and parameter sweeps that emit plot-ready CSV.
//!
//! ```
//! use rankfair::generators::{make_first, uniform_population};
//! use rankfair::metrics::{Metric, MetricConfig};
//! use rankfair::ranking::CandidateSet;
//!
//! let pop = uniform_population(7, 3).unwrap();
//! let first = make_first(&CandidateSet::full(pop));
//! let psp = Metric::PSP.evaluate(&first, &MetricConfig::default()).unwrap();
//! assert_eq!(psp, 1.0);
//! ```

pub mod cli;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod metrics;
pub mod oracle;
pub mod properties;
pub mod ranking;

pub use error::{Error, Result};
pub use metrics::{Cutoffs, LogBase, Metric, MetricConfig, Normalizer, Setting};
pub use ranking::{Candidate, CandidateSet, Group, Population, Ranking};
