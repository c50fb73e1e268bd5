//! Link-prediction evaluation on large graphs under extreme class imbalance.
//!
//! The pipeline is: load a [`graph::Graph`], hold out a seeded fraction of its
//! edges with [`split::random_split`], rank distance-2 candidate pairs with a
//! neighborhood scorer ([`scorers`]), turn the ranking into PR/ROC curves
//! ([`curves`]), and measure AUPR, AUROC and the budget-constrained AUPR
//! ([`metrics`]). [`experiments`] strings these together into the
//! split-variance and scorer-impact studies.

pub mod curves;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod metrics;
pub mod scorers;
pub mod split;

pub use error::{Error, Result};
