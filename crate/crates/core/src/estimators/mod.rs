//! Estimators of the cumulative incidence functions at the support points of
//! a [`TallyTable`].
//!
//! * [`simple_estimator`]: per-point ratio of cause counts to totals; the
//!   maximizer when monotonicity is dropped.
//! * [`naive_estimator`]: per-cause isotonic fit of the reduced binomial data;
//!   ignores the constraint that the components sum to at most one.
//! * [`mle`]: joint maximizer over nondecreasing components with sum at most one.
//!
//! In the grouped model the same code estimates the interval averages of the
//! cumulative incidence functions; interpretation is up to the caller.

mod kkt;
mod likelihood;
mod mle;
mod naive;
mod polish;

use serde::{Deserialize, Serialize};

use crate::data::TallyTable;
use crate::error::Result;

pub use kkt::kkt_residual;
pub use likelihood::{log_likelihood, marginal_log_likelihood};
pub use mle::{mle, MleFit, SolverSettings};
pub use naive::{constrained_naive, naive_estimate, naive_estimator, simple_estimator};

/// Runs the estimator of the given kind.
pub fn fit(tally: &TallyTable, kind: EstimatorKind, settings: &SolverSettings) -> Result<StepEstimate> {
    Ok(match kind {
        EstimatorKind::Mle => mle(tally, settings)?.estimate,
        EstimatorKind::Naive => naive_estimate(tally),
        EstimatorKind::Simple => simple_estimator(tally),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Mle,
    Naive,
    Simple,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Mle => "mle",
            EstimatorKind::Naive => "naive",
            EstimatorKind::Simple => "simple",
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mle" => Ok(EstimatorKind::Mle),
            "naive" => Ok(EstimatorKind::Naive),
            "simple" => Ok(EstimatorKind::Simple),
            other => Err(format!("unknown estimator '{other}'")),
        }
    }
}

/// A `K`-vector of step functions, given by their values at the support points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEstimate {
    pub support: Vec<f64>,
    /// `values[i][k]`: cause `k + 1` at `support[i]`.
    pub values: Vec<Vec<f64>>,
    pub kind: EstimatorKind,
}

impl StepEstimate {
    pub fn causes(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Value of cause `k` (1-based) at support index `i`.
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i][k - 1]
    }

    /// Values of cause `k` (1-based) over the support.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[k - 1]).collect()
    }

    /// Step-function value of cause `k` at an arbitrary time: the value at the
    /// largest support point `<= t`, or 0 left of the support.
    pub fn at(&self, t: f64, k: usize) -> f64 {
        let idx = self.support.partition_point(|&s| s <= t);
        idx.checked_sub(1).map_or(0.0, |i| self.value(i, k))
    }

    /// Sum over causes at support index `i`.
    pub fn total(&self, i: usize) -> f64 {
        self.values[i].iter().sum()
    }

    fn from_components(support: Vec<f64>, components: &[Vec<f64>], kind: EstimatorKind) -> Self {
        let values = (0..support.len())
            .map(|i| components.iter().map(|c| c[i]).collect())
            .collect();
        Self { support, values, kind }
    }
}
