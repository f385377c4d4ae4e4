use crate::data::TallyTable;

/// `count * ln(value)` with the convention `0 * ln 0 = 0`.
#[inline]
pub(crate) fn xlogy(count: u64, value: f64) -> f64 {
    if count == 0 {
        0.0
    } else if value > 0.0 {
        count as f64 * value.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Full log-likelihood on raw counts (no `1/n` factor):
/// `sum_s sum_k count_k(s) ln F_k(s)` with `F_{K+1} = 1 - sum_k F_k`.
///
/// Returns `-inf` when a positive count meets a zero (or negative) value.
pub fn log_likelihood(tally: &TallyTable, values: &[Vec<f64>]) -> f64 {
    assert_eq!(values.len(), tally.len(), "one value vector per support point");
    let causes = tally.causes();
    let mut ll = 0.0;
    for (i, row) in values.iter().enumerate() {
        let mut sum = 0.0;
        for k in 1..=causes {
            let v = row[k - 1];
            sum += v;
            ll += xlogy(tally.count(i, k), v);
        }
        ll += xlogy(tally.censored(i), 1.0 - sum);
    }
    ll
}

/// Marginal binomial log-likelihood of cause `k` for one component `x`.
pub fn marginal_log_likelihood(tally: &TallyTable, k: usize, x: &[f64]) -> f64 {
    assert_eq!(x.len(), tally.len());
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let e = tally.count(i, k);
            xlogy(e, v) + xlogy(tally.total(i) - e, 1.0 - v)
        })
        .sum()
}
