//! Synthetic competing risks current status data and Monte Carlo experiments.

mod coverage;
mod generate;
mod rate;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::data::{Closure, GroupingScheme, Model};
use crate::error::{Error, Result};

pub use coverage::{coverage_experiment, CoverageReport, CoverageRow, CoverageSettings};
pub use generate::generate_dataset;
pub use rate::{rate_experiment, RateConfig, RateRow};

/// Law of the event time given its cause.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventLaw {
    /// Gamma with the given shape and scale (mean `shape * scale`).
    Gamma { shape: f64, scale: f64 },
    /// Degenerate at one time.
    PointMass { at: f64 },
}

impl EventLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EventLaw::Gamma { shape, scale } if shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite() => {
                Ok(())
            }
            EventLaw::PointMass { at } if at.is_finite() => Ok(()),
            _ => Err(Error::InvalidArgument(format!("invalid event law {self:?}"))),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            EventLaw::Gamma { shape, scale } => {
                if t <= 0.0 {
                    0.0
                } else {
                    gamma_lr(shape, t / scale)
                }
            }
            EventLaw::PointMass { at } => f64::from(t >= at),
        }
    }

    /// An antiderivative of the distribution function.
    pub fn integrated_cdf(&self, t: f64) -> f64 {
        match *self {
            EventLaw::Gamma { shape, scale } => {
                if t <= 0.0 {
                    0.0
                } else {
                    t * gamma_lr(shape, t / scale) - shape * scale * gamma_lr(shape + 1.0, t / scale)
                }
            }
            EventLaw::PointMass { at } => (t - at).max(0.0),
        }
    }

    /// Average of the distribution function over `[lower, upper]`.
    pub fn average_cdf(&self, lower: f64, upper: f64) -> f64 {
        if upper <= lower {
            return self.cdf(lower);
        }
        (self.integrated_cdf(upper) - self.integrated_cdf(lower)) / (upper - lower)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            EventLaw::Gamma { shape, scale } => {
                Gamma::new(shape, scale).expect("validated gamma parameters").sample(rng)
            }
            EventLaw::PointMass { at } => at,
        }
    }
}

/// Law of the inspection time, which also fixes the observation model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservationLaw {
    /// Uniform on a finite grid (discrete model).
    Grid { points: Vec<f64> },
    /// Continuous uniform (smooth model).
    Uniform { lower: f64, upper: f64 },
    /// Continuous uniform, recorded only as the cell containing it (grouped
    /// model). Cells are consecutive `breaks` with the given closure and
    /// midpoint representatives.
    Grouped { lower: f64, upper: f64, breaks: Vec<f64>, closure: Closure },
}

impl ObservationLaw {
    pub fn model(&self) -> Result<Model> {
        Ok(match self {
            ObservationLaw::Grid { .. } => Model::Discrete,
            ObservationLaw::Uniform { .. } => Model::Smooth,
            ObservationLaw::Grouped { breaks, closure, .. } => {
                Model::Grouped(GroupingScheme::from_breaks(breaks, *closure)?)
            }
        })
    }

    /// Number of potential support points (grid points or cells); `None` for
    /// a continuous law.
    pub fn points(&self) -> Option<usize> {
        match self {
            ObservationLaw::Grid { points } => Some(points.len()),
            ObservationLaw::Uniform { .. } => None,
            ObservationLaw::Grouped { breaks, .. } => Some(breaks.len().saturating_sub(1)),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        match self {
            ObservationLaw::Grid { points } => {
                if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
                    return bad("grid must be nonempty and finite");
                }
                if points.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("grid must be strictly increasing");
                }
            }
            ObservationLaw::Uniform { lower, upper } | ObservationLaw::Grouped { lower, upper, .. } => {
                if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                    return bad("uniform range must satisfy lower < upper");
                }
            }
        }
        if let ObservationLaw::Grouped { lower, upper, breaks, .. } = self {
            let Model::Grouped(scheme) = self.model()? else { unreachable!() };
            // Inspection times fall in the open range; probe every interior
            // break and the middle of every piece between them.
            let mut knots = vec![*lower];
            knots.extend(breaks.iter().copied().filter(|b| b > lower && b < upper));
            knots.push(*upper);
            for w in knots.windows(2) {
                scheme.round(0.5 * (w[0] + w[1]))?;
                if w[1] < *upper {
                    scheme.round(w[1])?;
                }
            }
        }
        Ok(())
    }
}

/// Equispaced grid `{i gap : lower < i gap <= upper}`.
///
/// Points are computed as `i / (1 / gap)` when `1 / gap` is an integer, so
/// that decimal grids such as spacing 0.1 hit values like 10.0 and 30.0
/// exactly.
pub fn equispaced_grid(gap: f64, lower: f64, upper: f64) -> Vec<f64> {
    assert!(gap > 0.0 && lower < upper);
    let inverse = 1.0 / gap;
    let point = |i: i64| {
        if gap < 1.0 && (inverse - inverse.round()).abs() < 1e-9 {
            i as f64 / inverse.round()
        } else {
            i as f64 * gap
        }
    };
    let first = (lower / gap + 1e-9).floor() as i64 + 1;
    let last = (upper / gap + 1e-9).floor() as i64;
    (first..=last).map(point).filter(|&p| p > lower && p <= upper).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// `P(Y = k)`; the remainder is the probability that no event ever occurs.
    pub cause_probabilities: Vec<f64>,
    pub event_laws: Vec<EventLaw>,
    pub observation: ObservationLaw,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub evaluation_points: Vec<f64>,
}

impl SimulationConfig {
    /// Two causes with probabilities 0.6 and 0.4 and gamma event times with
    /// (shape, scale) (5, 3) and (9, 2).
    pub fn two_gamma_causes(observation: ObservationLaw, n: usize, replications: usize, seed: u64) -> Self {
        Self {
            cause_probabilities: vec![0.6, 0.4],
            event_laws: vec![
                EventLaw::Gamma { shape: 5.0, scale: 3.0 },
                EventLaw::Gamma { shape: 9.0, scale: 2.0 },
            ],
            observation,
            n,
            replications,
            seed,
            evaluation_points: vec![10.0, 20.0, 30.0],
        }
    }

    /// Uniform grid with the given spacing on `(5, 35]`.
    pub fn grid_with_gap(gap: f64) -> ObservationLaw {
        ObservationLaw::Grid { points: equispaced_grid(gap, 5.0, 35.0) }
    }

    pub fn causes(&self) -> usize {
        self.cause_probabilities.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.cause_probabilities.is_empty() || self.cause_probabilities.len() != self.event_laws.len() {
            return bad("need one event law per cause".into());
        }
        if self.cause_probabilities.iter().any(|p| !(*p >= 0.0)) {
            return bad("cause probabilities must be nonnegative".into());
        }
        if self.cause_probabilities.iter().sum::<f64>() > 1.0 + 1e-12 {
            return bad("cause probabilities must sum to at most one".into());
        }
        for law in &self.event_laws {
            law.validate()?;
        }
        self.observation.validate()?;
        if self.n == 0 {
            return bad("sample size must be positive".into());
        }
        if self.replications == 0 {
            return bad("replications must be positive".into());
        }
        let model = self.observation.model()?;
        for &t in &self.evaluation_points {
            let ok = match (&self.observation, &model) {
                (ObservationLaw::Grid { points }, _) => points.iter().any(|p| p.to_bits() == t.to_bits()),
                (ObservationLaw::Uniform { lower, upper }, _) => t >= *lower && t <= *upper,
                (_, Model::Grouped(scheme)) => scheme.representatives().iter().any(|r| r.to_bits() == t.to_bits()),
                _ => false,
            };
            if !ok {
                return bad(format!("evaluation point {t} is not a point of the observation law"));
            }
        }
        Ok(())
    }

    /// `F_0k(t) = P(X <= t, Y = k)`, or in the grouped model the average of
    /// `F_0k` over the part of the cell represented by `t` that the
    /// inspection law charges.
    pub fn true_value(&self, t: f64, k: usize) -> f64 {
        let p = self.cause_probabilities[k - 1];
        let law = &self.event_laws[k - 1];
        match &self.observation {
            ObservationLaw::Grid { .. } | ObservationLaw::Uniform { .. } => p * law.cdf(t),
            ObservationLaw::Grouped { lower, upper, breaks, closure } => {
                let scheme = GroupingScheme::from_breaks(breaks, *closure).expect("validated scheme");
                let cell = scheme.locate(t).expect("representative inside its cell");
                let iv = scheme.intervals()[cell];
                let (a, b) = (iv.lower.max(*lower), iv.upper.min(*upper));
                p * law.average_cdf(a, b)
            }
        }
    }
}
