//! Pointwise confidence intervals for the cumulative incidence functions.
//!
//! * [`ci_normal`]: plug-in asymptotic normal interval, valid at regular points
//!   of the discrete and grouped models.
//! * [`ci_bootstrap`] / [`bootstrap_intervals`]: symmetric nonparametric
//!   bootstrap interval around the MLE or naive estimate.
//! * [`ci_likelihood_ratio`]: inversion of the likelihood ratio test for the
//!   naive estimator, for the smooth model.

mod bootstrap;
mod covariance;
mod lr;
mod normal;

use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap_intervals, ci_bootstrap, BootstrapTarget};
pub use covariance::{covariance_plugin, CovarianceBlock};
pub use lr::{
    ci_likelihood_ratio, default_critical_value, lr_statistic, simulate_null_quantile, CriticalValue,
};
pub use normal::{ci_normal, normal_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Normal,
    Bootstrap,
    LikelihoodRatio,
}

impl CiMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CiMethod::Normal => "normal",
            CiMethod::Bootstrap => "bootstrap",
            CiMethod::LikelihoodRatio => "likelihood_ratio",
        }
    }
}

impl std::fmt::Display for CiMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CiMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(CiMethod::Normal),
            "bootstrap" => Ok(CiMethod::Bootstrap),
            "lr" | "likelihood_ratio" => Ok(CiMethod::LikelihoodRatio),
            other => Err(format!("unknown interval method '{other}'")),
        }
    }
}

/// Method-specific settings recorded with an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct CiMeta {
    pub resamples: Option<usize>,
    pub critical_value: Option<f64>,
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub point: f64,
    /// 1-based cause index.
    pub cause: usize,
    pub level: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: CiMethod,
    pub meta: CiMeta,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

pub(crate) fn check_level(level: f64) -> crate::error::Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(crate::error::Error::InvalidArgument(format!("level {level} outside (0, 1)")))
    }
}
