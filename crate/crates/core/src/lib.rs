//! Nonparametric estimation of cause-specific cumulative incidence functions
//! from competing risks current status data.
//!
//! Observations `(time, status)` are tallied per observation model
//! ([`data::Model`]) into a [`data::TallyTable`]. The [`estimators`] module
//! fits the maximum likelihood, naive and simple estimators; [`inference`]
//! builds pointwise normal, bootstrap and likelihood ratio intervals; and
//! [`simulation`] runs coverage and rate experiments.

pub mod data;
pub mod error;
pub mod estimators;
pub mod io;
pub mod isotonic;
pub mod regularity;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod inference;
pub mod rng;
pub mod simulation;
