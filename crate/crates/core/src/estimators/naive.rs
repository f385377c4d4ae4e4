use super::{EstimatorKind, StepEstimate};
use crate::data::TallyTable;
use crate::isotonic::pava_binomial;

/// Per-point ratio `count_k(s) / total(s)`, with `0/0 = 0`.
pub fn simple_estimator(tally: &TallyTable) -> StepEstimate {
    let values = (0..tally.len())
        .map(|i| {
            let total = tally.total(i);
            (1..=tally.causes())
                .map(|k| if total == 0 { 0.0 } else { tally.count(i, k) as f64 / total as f64 })
                .collect()
        })
        .collect();
    StepEstimate { support: tally.support().to_vec(), values, kind: EstimatorKind::Simple }
}

/// Isotonic fit of `(events, totals)` over points with a positive total;
/// points without observations take the value of the nearest preceding
/// fitted point (0 if none).
pub(crate) fn fit_with_gaps(events: &[u64], totals: &[u64]) -> Vec<f64> {
    let (ev, tot): (Vec<u64>, Vec<u64>) =
        events.iter().zip(totals).filter(|(_, &t)| t > 0).map(|(&e, &t)| (e, t)).unzip();
    let fitted = pava_binomial(&ev, &tot);
    let mut it = fitted.into_iter();
    let mut last = 0.0;
    totals
        .iter()
        .map(|&t| {
            if t > 0 {
                last = it.next().expect("one fitted value per positive total");
            }
            last
        })
        .collect()
}

/// Naive estimator of cause `k` (1-based): the nondecreasing maximizer of
/// the binomial likelihood of the reduced data `(C, 1{X <= C, Y = k})`.
pub fn naive_estimator(tally: &TallyTable, k: usize) -> Vec<f64> {
    assert!((1..=tally.causes()).contains(&k), "cause index out of range");
    let (events, totals): (Vec<u64>, Vec<u64>) = tally.marginal(k).into_iter().unzip();
    fit_with_gaps(&events, &totals)
}

/// All `K` naive components.
pub fn naive_estimate(tally: &TallyTable) -> StepEstimate {
    let components: Vec<Vec<f64>> = (1..=tally.causes()).map(|k| naive_estimator(tally, k)).collect();
    StepEstimate::from_components(tally.support().to_vec(), &components, EstimatorKind::Naive)
}

/// Naive component of cause `k` maximized under the constraint `F(t0) = theta`.
///
/// Points before `t0` are fitted on their own and capped at `theta`; points
/// after `t0` are fitted on their own and floored at `theta`; a support point
/// equal to `t0` is pinned to `theta`. `t0` need not be a support point.
pub fn constrained_naive(tally: &TallyTable, k: usize, t0: f64, theta: f64) -> Vec<f64> {
    assert!((1..=tally.causes()).contains(&k), "cause index out of range");
    assert!((0.0..=1.0).contains(&theta), "theta must lie in [0, 1]");
    let marginal = tally.marginal(k);
    let support = tally.support();
    let split_left = support.partition_point(|&s| s < t0);
    let split_right = support.partition_point(|&s| s <= t0);

    let side = |range: std::ops::Range<usize>| {
        let (e, t): (Vec<u64>, Vec<u64>) = marginal[range].iter().copied().unzip();
        fit_with_gaps(&e, &t)
    };
    let left = side(0..split_left);
    let right = side(split_right..support.len());

    let mut out = Vec::with_capacity(support.len());
    out.extend(left.into_iter().map(|v| v.min(theta)));
    out.extend(std::iter::repeat_n(theta, split_right - split_left));
    out.extend(right.into_iter().map(|v| v.max(theta)));
    out
}
