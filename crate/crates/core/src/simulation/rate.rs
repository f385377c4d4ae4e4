use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EventLaw;
use crate::data::TallyTable;
use crate::error::{Error, Result};
use crate::estimators::naive_estimator;
use crate::rng::{derive_seed, stream_rng};

/// Univariate model for the grid-spacing experiment: an event of
/// probability `probability` with time law `law`, inspected on a grid laid
/// over `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub probability: f64,
    pub law: EventLaw,
    pub lower: f64,
    pub upper: f64,
}

impl RateConfig {
    /// Time corresponding to a point of the rescaled range `[0, 1]`.
    pub fn time(&self, u: f64) -> f64 {
        self.lower + u * (self.upper - self.lower)
    }

    pub fn true_value(&self, u: f64) -> f64 {
        self.probability * self.law.cdf(self.time(u))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub spacing: f64,
    pub grid_points: usize,
    /// Largest grid point below the target, on the rescaled range.
    pub point: f64,
    pub time: f64,
    pub true_value: f64,
    /// `F_0(t0) (1 - F_0(t0))` at the fixed target.
    pub target_variance: f64,
    pub mean_deviation: f64,
    pub sd_deviation: f64,
    /// Variance of `n^((1 - gamma) / 2) (F_hat - F_0)`.
    pub scaled_variance_sparse: f64,
    /// Standard deviation of `n^(1/3) (F_hat - F_0)`.
    pub scaled_sd_cube_root: f64,
}

/// For each `n`, inspects on the grid `{j h : j = 1, ..., floor(1/h)}` with
/// `h = n^-gamma` (rescaled range), estimates `F_0` by the univariate
/// maximum likelihood estimator and summarizes the deviation at the largest
/// grid point strictly below `t0`.
pub fn rate_experiment(
    gamma: f64,
    n_values: &[usize],
    base: &RateConfig,
    t0: f64,
    replications: usize,
    seed: u64,
) -> Result<Vec<RateRow>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument("exponent must lie in (0, 1)".into()));
    }
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(Error::InvalidArgument("target must lie in (0, 1)".into()));
    }
    if replications < 2 || n_values.is_empty() || n_values.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument("need positive sample sizes and at least two replications".into()));
    }
    if !(0.0..=1.0).contains(&base.probability) || !(base.lower < base.upper) {
        return Err(Error::InvalidArgument("invalid base configuration".into()));
    }
    base.law.validate()?;
    let f_target = base.true_value(t0);

    n_values
        .iter()
        .map(|&n| {
            let h = (n as f64).powf(-gamma);
            let m = (1.0 / h + 1e-9).floor() as usize;
            let grid: Vec<f64> = (1..=m).map(|j| j as f64 * h).collect();
            let Some(target) = grid.iter().rposition(|&u| u < t0) else {
                return Err(Error::InvalidArgument(format!("no grid point below {t0} for n = {n}")));
            };
            let times: Vec<f64> = grid.iter().map(|&u| base.time(u)).collect();
            let truth = base.true_value(grid[target]);
            let stream_seed = derive_seed(seed, n as u64);
            let deviations: Vec<f64> = (0..replications)
                .into_par_iter()
                .map(|r| {
                    let mut rng = stream_rng(stream_seed, r as u64);
                    let mut counts = vec![vec![0u64; 2]; m];
                    for _ in 0..n {
                        let occurs = rng.random::<f64>() < base.probability;
                        let x = if occurs { base.law.sample(&mut rng) } else { f64::INFINITY };
                        let c = rng.random_range(0..m);
                        counts[c][usize::from(x > times[c])] += 1;
                    }
                    let (support, counts): (Vec<f64>, Vec<Vec<u64>>) =
                        times.iter().zip(counts).filter(|(_, c)| c[0] + c[1] > 0).map(|(&t, c)| (t, c)).unzip();
                    let tally = TallyTable::new(support, counts, 1).expect("valid counts");
                    let fit = naive_estimator(&tally, 1);
                    let estimate = tally.index_at_or_before(times[target]).map_or(0.0, |i| fit[i]);
                    estimate - truth
                })
                .collect();
            let reps = replications as f64;
            let mean = deviations.iter().sum::<f64>() / reps;
            let var = deviations.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (reps - 1.0);
            Ok(RateRow {
                n,
                spacing: h,
                grid_points: m,
                point: grid[target],
                time: times[target],
                true_value: truth,
                target_variance: f_target * (1.0 - f_target),
                mean_deviation: mean,
                sd_deviation: var.sqrt(),
                scaled_variance_sparse: (n as f64).powf(1.0 - gamma) * var,
                scaled_sd_cube_root: (n as f64).powf(1.0 / 3.0) * var.sqrt(),
            })
        })
        .collect()
}
