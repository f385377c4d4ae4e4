use csrisk_core::data::TallyTable;
use csrisk_core::estimators::{
    constrained_naive, kkt_residual, log_likelihood, marginal_log_likelihood, mle, naive_estimator, simple_estimator,
    EstimatorKind, SolverSettings,
};
use csrisk_core::oracle::{brute_force_mle, gcm_slopes};
use proptest::prelude::*;

fn table(rows: Vec<Vec<u64>>) -> TallyTable {
    let k = rows[0].len() - 1;
    TallyTable::new((1..=rows.len()).map(|i| i as f64).collect(), rows, k).unwrap()
}

#[test]
fn likelihood_examples() {
    assert!((log_likelihood(&table(vec![vec![1, 0]]), &[vec![0.5]]) - 0.5f64.ln()).abs() < 1e-15);
    // 0 log 0 = 0 for an unobserved cause at zero.
    let t = table(vec![vec![2, 0, 1]]);
    assert!((log_likelihood(&t, &[vec![0.5, 0.0]]) - 3.0 * 0.5f64.ln()).abs() < 1e-15);
    let t = table(vec![vec![3, 1, 1]]);
    let expected = 3.0 * 0.6f64.ln() + 0.2f64.ln() + 0.2f64.ln();
    assert!((log_likelihood(&t, &[vec![0.6, 0.2]]) - expected).abs() < 1e-12);
    assert_eq!(log_likelihood(&t, &[vec![0.0, 0.2]]), f64::NEG_INFINITY);
}

#[test]
fn simple_examples() {
    let t = TallyTable::new(vec![1.0, 2.0, 3.0], vec![vec![3, 1, 1], vec![0, 0, 0], vec![5, 0, 0]], 2).unwrap();
    let s = simple_estimator(&t);
    assert_eq!(s.values, vec![vec![0.6, 0.2], vec![0.0, 0.0], vec![1.0, 0.0]]);
    assert_eq!(s.kind, EstimatorKind::Simple);
}

#[test]
fn naive_examples() {
    assert_eq!(naive_estimator(&table(vec![vec![1, 0], vec![0, 1], vec![1, 0]]), 1), vec![0.5, 0.5, 1.0]);
    assert_eq!(naive_estimator(&table(vec![vec![1, 3], vec![2, 2], vec![3, 1]]), 1), vec![0.25, 0.5, 0.75]);
    assert_eq!(naive_estimator(&table(vec![vec![0, 3], vec![0, 2]]), 1), vec![0.0, 0.0]);
}

#[test]
fn univariate_mle_pools_violators() {
    let fit = mle(&table(vec![vec![2, 2], vec![1, 3]]), &SolverSettings::default()).unwrap();
    assert_eq!(fit.estimate.component(1), vec![0.375, 0.375]);
}

#[test]
fn kkt_examples() {
    // Optima lie on the 1/128 lattice, so the oracle finds them exactly.
    for rows in [vec![vec![1, 0, 1], vec![0, 1, 1]], vec![vec![2, 1, 1], vec![1, 1, 2]]] {
        let t = table(rows);
        let oracle = brute_force_mle(&t, 1.0 / 128.0).unwrap();
        assert!(kkt_residual(&t, &oracle.argmax) <= 1e-6);
        let fit = mle(&t, &SolverSettings::default()).unwrap();
        assert!((fit.log_likelihood - oracle.optimum).abs() < 1e-9);
    }
    let t = table(vec![vec![1, 1, 4], vec![3, 2, 3], vec![5, 3, 2]]);
    let simple = simple_estimator(&t);
    assert!(kkt_residual(&t, &simple.values) <= 1e-12);
    let mut perturbed = simple.values.clone();
    perturbed[1][0] += 0.05;
    assert!(kkt_residual(&t, &perturbed) > 1e-3);
}

#[test]
fn oracle_recovers_monotone_simple_estimator() {
    let t = table(vec![vec![1, 1, 2], vec![2, 1, 1]]);
    let oracle = brute_force_mle(&t, 0.01).unwrap();
    let simple = simple_estimator(&t);
    for (a, b) in oracle.argmax.iter().flatten().zip(simple.values.iter().flatten()) {
        assert!((a - b).abs() <= 0.01);
    }
}

#[test]
fn constrained_examples() {
    let t = table(vec![vec![1, 3], vec![1, 1], vec![0, 2], vec![3, 1]]);
    let naive = naive_estimator(&t, 1);
    for (i, &s) in t.support().iter().enumerate() {
        assert_eq!(constrained_naive(&t, 1, s, naive[i]), naive);
    }
    // Pinning to zero: values vanish up to t0, and the likelihood is -inf
    // because events occurred there.
    let c = constrained_naive(&t, 1, 2.0, 0.0);
    assert_eq!(&c[..2], &[0.0, 0.0]);
    assert_eq!(&c[2..], &naive_estimator(&TallyTable::new(vec![3.0, 4.0], vec![vec![0, 2], vec![3, 1]], 1).unwrap(), 1)[..]);
    assert_eq!(marginal_log_likelihood(&t, 1, &c), f64::NEG_INFINITY);
}

#[test]
fn constrained_likelihood_never_exceeds_free() {
    let t = table(vec![vec![1, 3], vec![2, 1], vec![0, 2], vec![3, 1]]);
    let free = marginal_log_likelihood(&t, 1, &naive_estimator(&t, 1));
    for theta in (0..=20).map(|i| i as f64 / 20.0) {
        let c = constrained_naive(&t, 1, 2.0, theta);
        let v = marginal_log_likelihood(&t, 1, &c);
        assert!(v <= free + 1e-12);
        assert!(c.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(c[1], theta);
    }
}

fn tallies(max_points: usize, max_causes: usize) -> impl Strategy<Value = TallyTable> {
    (1..=max_points, 1..=max_causes).prop_flat_map(|(m, k)| {
        prop::collection::vec(prop::collection::vec(0u64..6, k + 1), m).prop_filter_map("empty", move |rows| {
            TallyTable::new((0..rows.len()).map(|i| i as f64).collect(), rows, k).ok()
        })
    })
}

fn monotone_candidate(m: usize, k: usize, raw: &[f64]) -> Vec<Vec<f64>> {
    // Cumulative jumps normalized by a total that includes survivor mass.
    let jumps: Vec<f64> = raw.iter().take(m * k + 1).copied().collect();
    let total: f64 = jumps.iter().sum();
    let mut values = vec![vec![0.0; k]; m];
    for c in 0..k {
        let mut acc = 0.0;
        for (i, row) in values.iter_mut().enumerate() {
            acc += jumps[c * m + i] / total;
            row[c] = acc;
        }
    }
    values
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn likelihood_ordering(t in tallies(8, 3), raw in prop::collection::vec(0.0f64..1.0, 25)) {
        let settings = SolverSettings::default();
        let fit = mle(&t, &settings).unwrap();
        let simple = log_likelihood(&t, &simple_estimator(&t).values);
        prop_assert!(simple >= fit.log_likelihood - 1e-9);
        let candidate = monotone_candidate(t.len(), t.causes(), &raw);
        prop_assert!(fit.log_likelihood >= log_likelihood(&t, &candidate) - 1e-9);
    }

    #[test]
    fn mle_invariants(t in tallies(10, 4)) {
        let settings = SolverSettings::default();
        let fit = mle(&t, &settings).unwrap();
        let v = &fit.estimate.values;
        for row in v {
            prop_assert!(row.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!(row.iter().sum::<f64>() <= 1.0 + 1e-10);
        }
        for k in 0..t.causes() {
            prop_assert!(v.windows(2).all(|w| w[0][k] <= w[1][k]));
        }
        prop_assert!(fit.kkt_residual <= settings.kkt_tolerance);
        prop_assert!(fit.trace.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(fit.estimate.kind, EstimatorKind::Mle);
    }

    #[test]
    fn naive_matches_gcm(t in tallies(12, 1)) {
        let mut diagram = vec![(0.0, 0.0)];
        let (mut w, mut y) = (0.0, 0.0);
        for i in 0..t.len() {
            if t.total(i) > 0 {
                w += t.total(i) as f64;
                y += t.count(i, 1) as f64;
                diagram.push((w, y));
            }
        }
        let slopes = gcm_slopes(&diagram);
        let naive = naive_estimator(&t, 1);
        let observed: Vec<f64> = (0..t.len()).filter(|&i| t.total(i) > 0).map(|i| naive[i]).collect();
        for (a, b) in observed.iter().zip(&slopes) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        prop_assert_eq!(mle(&t, &SolverSettings::default()).unwrap().estimate.component(1), naive);
    }

    #[test]
    fn mle_is_deterministic(t in tallies(6, 3)) {
        let settings = SolverSettings::default();
        prop_assert_eq!(mle(&t, &settings).unwrap(), mle(&t, &settings).unwrap());
    }
}
