//! First-order optimality certificate for the joint maximum likelihood problem.
//!
//! Writing each component as cumulative masses `p_kj = F_k(s_j) - F_k(s_{j-1})`
//! and the survivor mass beyond the support as `q = 1 - F_+(s_last)`, the
//! feasible set is the simplex `p >= 0, q >= 0, sum p + q = 1` and every
//! observation's likelihood is linear in the masses. The directional
//! derivative for moving mass onto `(k, j)` is
//!
//! ```text
//! D_kj = sum_{s >= s_j} count_k(s) / F_k(s) + sum_{s < s_j} count_{K+1}(s) / S(s)
//! ```
//!
//! with `S = 1 - F_+`, and `D_q = sum_s count_{K+1}(s) / S(s)`. At the optimum
//! every derivative is at most `n`, with equality wherever the mass is
//! positive. Equivalently the right partial sums of the per-point gradients
//! `count_k / F_k - count_{K+1} / S` never exceed the multiplier of the
//! sum-to-one constraint and attain it at jumps.

use crate::data::TallyTable;

/// Largest violation of the optimality conditions, relative to `n`.
///
/// Combines stationarity (`max(D - n, 0)`), complementary slackness
/// (`mass * |D - n|`) and feasibility (negativity, decreases, sum above one).
/// Zero at an exact optimum; infinite if a positive count meets a zero value.
pub fn kkt_residual(tally: &TallyTable, values: &[Vec<f64>]) -> f64 {
    assert_eq!(values.len(), tally.len());
    let m = tally.len();
    let causes = tally.causes();
    let n = tally.n() as f64;
    let mut worst: f64 = 0.0;

    let survival: Vec<f64> = values.iter().map(|row| 1.0 - row.iter().sum::<f64>()).collect();
    for row in values {
        for &v in row {
            worst = worst.max(-v);
        }
    }
    for s in &survival {
        worst = worst.max(-s);
    }

    // Censored contribution strictly left of each index.
    let mut left_censored = vec![0.0; m + 1];
    for i in 0..m {
        let b = tally.censored(i);
        let term = if b == 0 {
            0.0
        } else if survival[i] > 0.0 {
            b as f64 / survival[i]
        } else {
            return f64::INFINITY;
        };
        left_censored[i + 1] = left_censored[i] + term;
    }
    let d_q = left_censored[m];
    let q = survival[m - 1].max(0.0);
    worst = worst.max((d_q - n) / n);
    worst = worst.max(q * (d_q - n).abs() / n);

    for k in 1..=causes {
        let mut right_events = 0.0;
        for j in (0..m).rev() {
            let a = tally.count(j, k);
            let f = values[j][k - 1];
            if a > 0 {
                if f <= 0.0 {
                    return f64::INFINITY;
                }
                right_events += a as f64 / f;
            }
            let d = right_events + left_censored[j];
            let prev = if j == 0 { 0.0 } else { values[j - 1][k - 1] };
            let mass = f - prev;
            worst = worst.max(-mass);
            worst = worst.max((d - n) / n);
            worst = worst.max(mass.max(0.0) * (d - n).abs() / n);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::simple_estimator;

    #[test]
    fn simple_estimator_is_certified_when_monotone() {
        let t = TallyTable::new(
            vec![1.0, 2.0, 3.0],
            vec![vec![1, 1, 4], vec![3, 2, 3], vec![6, 3, 1]],
            2,
        )
        .unwrap();
        let s = simple_estimator(&t);
        assert!(kkt_residual(&t, &s.values) <= 1e-12);
    }

    #[test]
    fn perturbation_is_detected() {
        let t = TallyTable::new(
            vec![1.0, 2.0, 3.0],
            vec![vec![1, 1, 4], vec![3, 2, 3], vec![6, 3, 1]],
            2,
        )
        .unwrap();
        let mut v = simple_estimator(&t).values;
        v[1][0] += 0.05;
        assert!(kkt_residual(&t, &v) > 1e-3);
    }

    #[test]
    fn infeasible_values_are_infinite_or_positive() {
        let t = TallyTable::new(vec![1.0], vec![vec![1, 1]], 1).unwrap();
        assert_eq!(kkt_residual(&t, &[vec![0.0]]), f64::INFINITY);
        assert_eq!(kkt_residual(&t, &[vec![1.0]]), f64::INFINITY);
        assert!((kkt_residual(&t, &[vec![0.5]])).abs() < 1e-15);
    }
}
