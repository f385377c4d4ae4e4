//! Independent oracles for tests: exhaustive lattice maximization of the joint
//! likelihood and greatest-convex-minorant slopes.

use crate::data::TallyTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub optimum: f64,
    /// Row-major, as in [`StepEstimate::values`](crate::estimators::StepEstimate).
    pub argmax: Vec<Vec<f64>>,
    pub grid_step: f64,
    /// Number of feasible lattice candidates searched.
    pub candidates: u128,
}

const MAX_POINTS: usize = 3;
const MAX_CAUSES: usize = 2;

fn xlogy(count: u64, value: f64) -> f64 {
    match count {
        0 => 0.0,
        c if value > 0.0 => c as f64 * value.ln(),
        _ => f64::NEG_INFINITY,
    }
}

/// Best likelihood over all nondecreasing, sum-at-most-one candidates with
/// values in `{0, step, 2 step, ...} ∩ [0, 1]`.
///
/// Candidates are enumerated implicitly: a dynamic program over support
/// points keeps, for every lattice state at the current point, the best
/// likelihood of any monotone path ending there. This visits every candidate
/// exactly once in the sense that the returned optimum equals the maximum over
/// the full enumeration.
pub fn brute_force_mle(tally: &TallyTable, grid_step: f64) -> Result<OracleResult> {
    let m = tally.len();
    let causes = tally.causes();
    if m > MAX_POINTS || causes > MAX_CAUSES {
        return Err(Error::OracleLimitExceeded(format!(
            "{m} support points and {causes} causes (at most {MAX_POINTS} and {MAX_CAUSES})"
        )));
    }
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(Error::OracleLimitExceeded(format!("grid step {grid_step} outside (0, 0.1]")));
    }
    let levels = (1.0 / grid_step + 1e-9).floor() as usize + 1;
    let value = |i: usize| (i as f64 * grid_step).min(1.0);
    // State (i, j): cause 1 at level i, cause 2 at level j (j = 0 when K = 1).
    let width = if causes == 2 { levels } else { 1 };
    let feasible = |i: usize, j: usize| value(i) + value(j) <= 1.0 + 1e-12;
    let term = |s: usize, i: usize, j: usize| {
        let (x, y) = (value(i), if causes == 2 { value(j) } else { 0.0 });
        let mut t = xlogy(tally.count(s, 1), x) + xlogy(tally.censored(s), 1.0 - x - y);
        if causes == 2 {
            t += xlogy(tally.count(s, 2), y);
        }
        t
    };
    let idx = |i: usize, j: usize| i * width + j;

    let states = levels * width;
    let mut best = vec![f64::NEG_INFINITY; states];
    let mut count = vec![0u128; states];
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(m);
    for i in 0..levels {
        for j in 0..width {
            if feasible(i, j) {
                best[idx(i, j)] = term(0, i, j);
                count[idx(i, j)] = 1;
            }
        }
    }
    back.push((0..states).collect());
    for s in 1..m {
        // Prefix maxima over the dominated quadrant {i' <= i, j' <= j}. A
        // feasible state beats an infeasible one even at -inf likelihood.
        let mut pmax = vec![(f64::NEG_INFINITY, usize::MAX); states];
        let mut psum = vec![0u128; states];
        let better = |a: (f64, usize), b: (f64, usize)| match (a.1, b.1) {
            (usize::MAX, _) => b,
            (_, usize::MAX) => a,
            _ if b.0 > a.0 => b,
            _ => a,
        };
        for i in 0..levels {
            for j in 0..width {
                let here = idx(i, j);
                let own = if count[here] > 0 { (best[here], here) } else { (f64::NEG_INFINITY, usize::MAX) };
                let mut cand = own;
                let mut total = count[here];
                if i > 0 {
                    cand = better(cand, pmax[idx(i - 1, j)]);
                    total += psum[idx(i - 1, j)];
                }
                if j > 0 {
                    cand = better(cand, pmax[idx(i, j - 1)]);
                    total += psum[idx(i, j - 1)];
                }
                if i > 0 && j > 0 {
                    total -= psum[idx(i - 1, j - 1)];
                }
                pmax[here] = cand;
                psum[here] = total;
            }
        }
        let mut next = vec![f64::NEG_INFINITY; states];
        let mut next_count = vec![0u128; states];
        let mut from = vec![usize::MAX; states];
        for i in 0..levels {
            for j in 0..width {
                if !feasible(i, j) {
                    continue;
                }
                let here = idx(i, j);
                next[here] = term(s, i, j) + pmax[here].0;
                next_count[here] = psum[here];
                from[here] = pmax[here].1;
            }
        }
        best = next;
        count = next_count;
        back.push(from);
    }

    let candidates: u128 = count.iter().sum();
    let mut end = usize::MAX;
    let mut optimum = f64::NEG_INFINITY;
    for (state, &v) in best.iter().enumerate() {
        if count[state] > 0 && (end == usize::MAX || v > optimum) {
            optimum = v;
            end = state;
        }
    }
    let mut path = vec![end; m];
    for s in (1..m).rev() {
        path[s - 1] = back[s][path[s]];
    }
    let argmax = path
        .iter()
        .map(|&state| {
            let (i, j) = (state / width, state % width);
            if causes == 2 {
                vec![value(i), value(j)]
            } else {
                vec![value(i)]
            }
        })
        .collect();
    Ok(OracleResult { optimum, argmax, grid_step, candidates })
}

/// Left slopes of the greatest convex minorant of a cumulative sum diagram.
///
/// `diagram` starts at the origin of the diagram (typically `(0, 0)`); the
/// result has one slope per subsequent point. Collinear points are pooled.
pub fn gcm_slopes(diagram: &[(f64, f64)]) -> Vec<f64> {
    if diagram.len() < 2 {
        return Vec::new();
    }
    let mut hull: Vec<usize> = vec![0];
    for p in 1..diagram.len() {
        while hull.len() >= 2 {
            let (a, b) = (diagram[hull[hull.len() - 2]], diagram[hull[hull.len() - 1]]);
            let c = diagram[p];
            // Drop b unless it lies strictly below the chord from a to c.
            let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut slopes = Vec::with_capacity(diagram.len() - 1);
    for w in hull.windows(2) {
        let (a, b) = (diagram[w[0]], diagram[w[1]]);
        let slope = (b.1 - a.1) / (b.0 - a.0);
        slopes.extend(std::iter::repeat_n(slope, w[1] - w[0]));
    }
    slopes
}
