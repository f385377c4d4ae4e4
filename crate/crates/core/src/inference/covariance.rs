use serde::{Deserialize, Serialize};

use crate::data::TallyTable;
use crate::error::{Error, Result};
use crate::estimators::StepEstimate;

/// Plug-in estimate of the `K x K` asymptotic covariance of
/// `sqrt(n) (F_hat(s) - F_0(s))` at a regular point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceBlock {
    pub point: f64,
    pub matrix: Vec<Vec<f64>>,
}

/// `V[k][l] = (F_k 1{k = l} - F_k F_l) / p(s)` with `p(s) = total(s) / n`.
///
/// Row and column `k` are exactly zero when `F_k` is 0 or 1. The matrix is
/// positive semidefinite whenever the components sum to at most one, which
/// holds for the MLE and simple estimator but not always for the naive one.
pub fn covariance_plugin(tally: &TallyTable, estimate: &StepEstimate, s: f64) -> Result<CovarianceBlock> {
    let i = tally.index_of(s).ok_or(Error::PointNotInSupport(s))?;
    if tally.total(i) == 0 {
        return Err(Error::NoObservationsAtPoint(s));
    }
    let fraction = tally.fraction(i);
    let f: Vec<f64> = (1..=tally.causes()).map(|k| estimate.at(s, k)).collect();
    let degenerate = |v: f64| v <= 0.0 || v >= 1.0;
    let matrix = (0..f.len())
        .map(|k| {
            (0..f.len())
                .map(|l| {
                    if degenerate(f[k]) || degenerate(f[l]) {
                        0.0
                    } else if k == l {
                        f[k] * (1.0 - f[k]) / fraction
                    } else {
                        -f[k] * f[l] / fraction
                    }
                })
                .collect()
        })
        .collect();
    Ok(CovarianceBlock { point: s, matrix })
}
