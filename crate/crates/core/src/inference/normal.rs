use statrs::distribution::{ContinuousCDF, Normal};

use super::{check_level, CiMeta, CiMethod, ConfidenceInterval};
use crate::data::TallyTable;
use crate::error::{Error, Result};
use crate::estimators::StepEstimate;

/// Quantile of the standard normal distribution.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// `F_hat_k(s) -/+ z_{1 - alpha/2} sqrt(V_kk / n)`.
///
/// Since `V_kk / n = F(1 - F) / total(s)`, the half-width is computed from
/// the count at `s` directly. With `clip` the interval is intersected with
/// `[0, 1]`.
pub fn ci_normal(
    tally: &TallyTable,
    estimate: &StepEstimate,
    s: f64,
    k: usize,
    level: f64,
    clip: bool,
) -> Result<ConfidenceInterval> {
    check_level(level)?;
    if !(1..=tally.causes()).contains(&k) {
        return Err(Error::InvalidArgument(format!("cause {k} out of range")));
    }
    let i = tally.index_of(s).ok_or(Error::PointNotInSupport(s))?;
    let total = tally.total(i);
    if total == 0 {
        return Err(Error::NoObservationsAtPoint(s));
    }
    let f = estimate.at(s, k);
    let variance = if f <= 0.0 || f >= 1.0 { 0.0 } else { f * (1.0 - f) / total as f64 };
    let half = normal_quantile(0.5 + level / 2.0) * variance.sqrt();
    let (mut lower, mut upper) = (f - half, f + half);
    if clip {
        lower = lower.max(0.0);
        upper = upper.min(1.0);
    }
    Ok(ConfidenceInterval {
        point: s,
        cause: k,
        level,
        estimate: f,
        lower,
        upper,
        method: CiMethod::Normal,
        meta: CiMeta { clipped: clip, ..CiMeta::default() },
    })
}
