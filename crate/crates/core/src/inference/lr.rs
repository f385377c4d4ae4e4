use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_level, CiMeta, CiMethod, ConfidenceInterval};
use crate::data::{tally_discrete, Observation, TallyTable};
use crate::error::{Error, Result};
use crate::estimators::{constrained_naive, marginal_log_likelihood, naive_estimator};
use crate::rng::stream_rng;

/// Critical value for inverting the likelihood ratio test, with its source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub level: f64,
    pub value: f64,
    pub provenance: String,
}

/// Quantiles of the universal null limit of the likelihood ratio statistic
/// for a monotone function at a point.
const TABLE: [(f64, f64); 3] = [(0.90, 1.60362), (0.95, 2.26916), (0.99, 3.83904)];

/// Packaged critical value for the common levels 0.90, 0.95 and 0.99.
pub fn default_critical_value(level: f64) -> Option<CriticalValue> {
    TABLE.iter().find(|(l, _)| (l - level).abs() < 1e-12).map(|&(level, value)| CriticalValue {
        level,
        value,
        provenance: format!(
            "Banerjee-Wellner universal LR limit quantile table, level {level}: {value}"
        ),
    })
}

/// Twice the log of the ratio between the unconstrained naive likelihood of
/// cause `k` and its maximum under `F_k(t0) = theta`.
///
/// `t0` need not be a support point. Returns `+inf` when the constraint
/// forces a zero probability onto observed outcomes.
pub fn lr_statistic(tally: &TallyTable, k: usize, t0: f64, theta: f64) -> f64 {
    let free = marginal_log_likelihood(tally, k, &naive_estimator(tally, k));
    lr_against(tally, k, t0, theta, free)
}

fn lr_against(tally: &TallyTable, k: usize, t0: f64, theta: f64, free: f64) -> f64 {
    let constrained = marginal_log_likelihood(tally, k, &constrained_naive(tally, k, t0, theta));
    if constrained == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    (2.0 * (free - constrained)).max(0.0)
}

const BISECTION_TOLERANCE: f64 = 1e-6;

/// `{theta in [0, 1] : lr_statistic(theta) <= critical_value}`.
///
/// The statistic is convex in `theta` and vanishes at the naive estimate, so
/// the set is an interval around it. Each end is found by bisection with a
/// fixed number of halvings from `[theta_hat, 1]` or `[0, theta_hat]`, keeping
/// the inner bracket end; endpoints are therefore monotone in the critical
/// value.
pub fn ci_likelihood_ratio(
    tally: &TallyTable,
    k: usize,
    t0: f64,
    level: f64,
    critical_value: f64,
) -> Result<ConfidenceInterval> {
    check_level(level)?;
    if !(1..=tally.causes()).contains(&k) {
        return Err(Error::InvalidArgument(format!("cause {k} out of range")));
    }
    if !(critical_value >= 0.0) {
        return Err(Error::InvalidArgument("critical value must be nonnegative".into()));
    }
    let naive = naive_estimator(tally, k);
    let free = marginal_log_likelihood(tally, k, &naive);
    let center = tally.index_at_or_before(t0).map_or(0.0, |i| naive[i]);
    let inside = |theta: f64| lr_against(tally, k, t0, theta, free) <= critical_value;

    let search = |inner: f64, outer: f64| -> f64 {
        if inside(outer) {
            return outer;
        }
        let steps = ((inner - outer).abs() / BISECTION_TOLERANCE).log2().ceil().max(0.0) as usize;
        let (mut a, mut b) = (inner, outer);
        for _ in 0..steps {
            let mid = 0.5 * (a + b);
            if inside(mid) {
                a = mid;
            } else {
                b = mid;
            }
        }
        a
    };
    let lower = search(center, 0.0);
    let upper = search(center, 1.0);
    Ok(ConfidenceInterval {
        point: t0,
        cause: k,
        level,
        estimate: center,
        lower,
        upper,
        method: CiMethod::LikelihoodRatio,
        meta: CiMeta { critical_value: Some(critical_value), ..CiMeta::default() },
    })
}

/// Monte Carlo approximation of the `level` quantile of the null limit.
///
/// Simulates univariate current status samples of size `n` with event and
/// inspection times both uniform on `[0, 1]`, and evaluates the statistic at
/// the true value `F(1/2) = 1/2`.
pub fn simulate_null_quantile(level: f64, n: usize, replications: usize, seed: u64) -> Result<f64> {
    check_level(level)?;
    if n == 0 || replications == 0 {
        return Err(Error::InvalidArgument("need positive sample size and replications".into()));
    }
    let mut stats: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let obs: Vec<Observation> = (0..n)
                .map(|_| {
                    let x: f64 = rng.random();
                    let c: f64 = rng.random();
                    Observation::new(c, usize::from(x <= c))
                })
                .collect();
            let tally = tally_discrete(&obs, 1).expect("simulated data are valid");
            lr_statistic(&tally, 1, 0.5, 0.5)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let rank = ((replications as f64 * level).ceil() as usize).clamp(1, replications);
    Ok(stats[rank - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> TallyTable {
        TallyTable::new(
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![vec![1, 4], vec![0, 5], vec![3, 2], vec![2, 3], vec![5, 1]],
            1,
        )
        .unwrap()
    }

    #[test]
    fn zero_at_naive_value() {
        let t = table();
        let naive = naive_estimator(&t, 1);
        for (i, &s) in t.support().iter().enumerate() {
            assert_eq!(lr_statistic(&t, 1, s, naive[i]), 0.0);
        }
    }

    #[test]
    fn active_constraint_is_positive() {
        let t = table();
        assert!(lr_statistic(&t, 1, 3.0, 1.0).is_infinite());
        assert!(lr_statistic(&t, 1, 3.0, 0.9) > 0.0);
    }

    #[test]
    fn zero_critical_value_gives_point() {
        let t = table();
        let ci = ci_likelihood_ratio(&t, 1, 3.0, 0.95, 0.0).unwrap();
        let est = naive_estimator(&t, 1)[2];
        assert!(ci.lower <= est && est <= ci.upper);
        assert!(ci.width() < 1e-5);
    }

    #[test]
    fn nested_in_critical_value() {
        let t = table();
        let mut prev: Option<ConfidenceInterval> = None;
        for c in [0.1, 0.5, 1.0, 2.26916, 4.0] {
            let ci = ci_likelihood_ratio(&t, 1, 3.5, 0.95, c).unwrap();
            if let Some(p) = prev {
                assert!(ci.lower <= p.lower && p.upper <= ci.upper);
            }
            prev = Some(ci);
        }
    }

    #[test]
    fn defaults_have_provenance() {
        let c = default_critical_value(0.95).unwrap();
        assert_eq!(c.value, 2.26916);
        assert!(c.provenance.contains("2.26916"));
        assert!(default_critical_value(0.8).is_none());
    }
}
