//! Solver toolkit for fairness-over-time scheduling: pick a decision from a
//! fixed alpha-efficient set in each of `T` periods so that an unfairness
//! function of the per-stakeholder aggregated utilities is minimized.
//!
//! The crate offers three routes to a schedule: descriptive enumeration over
//! decision sequences, symmetry-free enumeration over count vectors, and a
//! probabilistic relaxation whose solution rounds back into concrete
//! schedules with certified error bounds, plus a column-generation solver for
//! the weighted min/average master problem.

pub mod aggregation;
pub mod colgen;
pub mod distributional;
pub mod error;
pub mod exact;
pub mod encodings;
pub mod instance;
pub mod lp;
pub mod num;
pub mod relaxation;
pub mod unfairness;

/// Scalar type used by the concrete solver pipeline.
pub type Scalar = f64;

pub use aggregation::{aggregate, parse_aggregator, AggregatorSpec};
pub use distributional::{
    dist, dist_aggregate, edd_of_sequence, ees_of_distribution, DiscreteDistribution,
};
pub use error::{FotError, Result};
pub use instance::{alpha_filter, FilteredInstance, Instance};
pub use unfairness::{parse_unfairness, unfairness, unfairness_lipschitz, UnfairnessSpec};
