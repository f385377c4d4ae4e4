//! Joint maximum likelihood estimator.
//!
//! Cyclic block-coordinate ascent over causes. The block for cause `k`, with
//! the other components held fixed, maximizes
//!
//! ```text
//! sum_s count_k(s) ln x_s + count_{K+1}(s) ln(r_s - x_s),   r_s = 1 - sum_{j != k} F_j(s)
//! ```
//!
//! over nondecreasing `0 <= x <= r`. The objective is separable, so an
//! iterative convex minorant step (isotonic regression of the Newton point
//! with the diagonal Hessian as weights) is an exact projected Newton step,
//! safeguarded by backtracking. Since `r` is nonincreasing, only `x <= r` at
//! the last support point has to be enforced.
//!
//! Block updates alone can stall when the survivor mass beyond the support is
//! zero: shifting mass from one cause to another needs both blocks to move.
//! Each sweep therefore ends with an EM step on the total mass of each cause
//! (and of the survivors), which rescales whole components. A fixed point of
//! both steps satisfies the joint optimality conditions checked by
//! [`kkt_residual`].
//!
//! Block ascent approaches constraint boundaries only geometrically. After a
//! fixed number of sweeps, or once a sweep stops improving the likelihood,
//! iterations switch to support reduction steps in the mass parametrization,
//! which identify the active set exactly; a sweep is used whenever such a
//! step fails to improve.

use serde::{Deserialize, Serialize};

use super::likelihood::xlogy;
use super::polish::Polisher;
use super::{kkt_residual, log_likelihood, naive_estimate, EstimatorKind, StepEstimate};
use crate::data::TallyTable;
use crate::error::{Error, Result};
use crate::isotonic::{pava, pava_binomial};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub max_outer_iterations: usize,
    /// Relative log-likelihood improvement below which a sweep counts as stalled.
    pub likelihood_tolerance: f64,
    pub kkt_tolerance: f64,
    /// Step contraction factor of the backtracking line search.
    pub contraction: f64,
    /// Floor for denominators of gradients and curvatures during iteration.
    pub floor_epsilon: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_outer_iterations: 10_000,
            likelihood_tolerance: 1e-12,
            kkt_tolerance: 1e-8,
            contraction: 0.5,
            floor_epsilon: 1e-14,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.likelihood_tolerance, self.kkt_tolerance, self.floor_epsilon];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(Error::InvalidArgument("contraction must lie in (0, 1)".into()));
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::InvalidArgument("max_outer_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Solver output with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub estimate: StepEstimate,
    pub log_likelihood: f64,
    pub kkt_residual: f64,
    /// Completed sweeps; 0 when a closed form applied.
    pub iterations: usize,
    /// Log-likelihood after initialization and after every sweep.
    pub trace: Vec<f64>,
}

/// Starting distance from the boundary of the sum constraint.
const INIT_SLACK: f64 = 1e-6;
const MAX_BACKTRACKS: usize = 60;
/// Block sweeps before support reduction steps take over.
const SWEEPS_BEFORE_POLISH: usize = 20;

/// Maximum likelihood estimate over nondecreasing components with pointwise
/// sum at most one.
///
/// For one cause this is the naive estimator. When the simple estimator is
/// already nondecreasing it is returned unchanged, as it maximizes the
/// likelihood even without the monotonicity constraints.
pub fn mle(tally: &TallyTable, settings: &SolverSettings) -> Result<MleFit> {
    settings.validate()?;
    let support = tally.support().to_vec();
    if tally.causes() == 1 {
        let mut estimate = naive_estimate(tally);
        estimate.kind = EstimatorKind::Mle;
        return Ok(closed_form(tally, estimate));
    }

    let observed: Vec<usize> = (0..tally.len()).filter(|&i| tally.total(i) > 0).collect();
    let problem = Problem::new(tally, &observed);

    if let Some(components) = problem.simple_if_monotone() {
        let estimate = expand(tally, &observed, &components);
        return Ok(closed_form(tally, StepEstimate { support, values: estimate, kind: EstimatorKind::Mle }));
    }

    let compressed = problem.table(tally, &observed);
    let mut f = problem.initial();
    let mut ll = problem.log_likelihood(&f);
    let mut trace = vec![ll];
    let mut residual = kkt_residual(&compressed, &problem.rows(&f));
    let mut iterations = 0;
    let polisher = Polisher::new(&problem);
    let mut stalled = false;
    while residual > settings.kkt_tolerance {
        if iterations == settings.max_outer_iterations {
            let values = expand(tally, &observed, &f);
            let last = StepEstimate { support, values, kind: EstimatorKind::Mle };
            return Err(Error::NonConvergence {
                iterations,
                log_likelihood: ll,
                kkt_residual: residual,
                last: Box::new(last),
            });
        }
        let before = f.clone();
        let polish = iterations >= SWEEPS_BEFORE_POLISH || stalled;
        if !(polish && polisher.step(&mut f)) {
            for k in 0..problem.causes {
                problem.icm_step(&mut f, k, settings);
            }
            problem.reallocate(&mut f);
        }
        let gain = problem.gain(&before, &f);
        assert!(gain >= 0.0, "likelihood decreased by {}", -gain);
        stalled = gain <= settings.likelihood_tolerance * ll.abs().max(1.0);
        ll += gain;
        trace.push(ll);
        residual = kkt_residual(&compressed, &problem.rows(&f));
        iterations += 1;
    }

    let values = expand(tally, &observed, &f);
    let estimate = StepEstimate { support, values, kind: EstimatorKind::Mle };
    Ok(MleFit { log_likelihood: log_likelihood(tally, &estimate.values), kkt_residual: residual, iterations, trace, estimate })
}

fn closed_form(tally: &TallyTable, estimate: StepEstimate) -> MleFit {
    let ll = log_likelihood(tally, &estimate.values);
    MleFit {
        kkt_residual: kkt_residual(tally, &estimate.values),
        log_likelihood: ll,
        iterations: 0,
        trace: vec![ll],
        estimate,
    }
}

/// Cause-major values on observed points back to row-major values on the
/// full support; unobserved points repeat the preceding value.
fn expand(tally: &TallyTable, observed: &[usize], f: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let causes = f.len();
    let mut out = Vec::with_capacity(tally.len());
    let mut current = vec![0.0; causes];
    let mut next = observed.iter().enumerate().peekable();
    for i in 0..tally.len() {
        if let Some((c, _)) = next.next_if(|&(_, &o)| o == i) {
            current = (0..causes).map(|k| f[k][c]).collect();
        }
        out.push(current.clone());
    }
    out
}

/// The likelihood restricted to observed points, cause-major.
pub(super) struct Problem {
    pub(super) m: usize,
    pub(super) causes: usize,
    pub(super) n: f64,
    /// `events[k][i]`
    pub(super) events: Vec<Vec<u64>>,
    pub(super) censored: Vec<u64>,
    /// First index with a positive count of each cause (`m` if none); earlier
    /// values are pinned to zero.
    pub(super) start: Vec<usize>,
}

impl Problem {
    fn new(tally: &TallyTable, observed: &[usize]) -> Self {
        let causes = tally.causes();
        let events: Vec<Vec<u64>> = (1..=causes)
            .map(|k| observed.iter().map(|&i| tally.count(i, k)).collect())
            .collect();
        let censored = observed.iter().map(|&i| tally.censored(i)).collect();
        let start = events.iter().map(|e| e.iter().position(|&c| c > 0).unwrap_or(observed.len())).collect();
        Self { m: observed.len(), causes, n: tally.n() as f64, events, censored, start }
    }

    fn table(&self, tally: &TallyTable, observed: &[usize]) -> TallyTable {
        let support = observed.iter().map(|&i| tally.support()[i]).collect();
        let counts = observed.iter().map(|&i| tally.counts()[i].clone()).collect();
        TallyTable::new(support, counts, self.causes).expect("observed rows form a valid table")
    }

    fn totals(&self) -> Vec<u64> {
        (0..self.m)
            .map(|i| self.censored[i] + self.events.iter().map(|e| e[i]).sum::<u64>())
            .collect()
    }

    fn rows(&self, f: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..self.m).map(|i| f.iter().map(|c| c[i]).collect()).collect()
    }

    fn simple_if_monotone(&self) -> Option<Vec<Vec<f64>>> {
        let totals = self.totals();
        let components: Vec<Vec<f64>> = self
            .events
            .iter()
            .map(|e| e.iter().zip(&totals).map(|(&c, &t)| c as f64 / t as f64).collect())
            .collect();
        let monotone = self.events.iter().all(|e| {
            // c1 / t1 <= c2 / t2, compared exactly.
            (1..self.m).all(|i| e[i - 1] as u128 * totals[i] as u128 <= e[i] as u128 * totals[i - 1] as u128)
        });
        monotone.then_some(components)
    }

    /// Naive components, shrunk so the sum constraint is slack everywhere.
    fn initial(&self) -> Vec<Vec<f64>> {
        let totals = self.totals();
        let mut f: Vec<Vec<f64>> = self.events.iter().map(|e| pava_binomial(e, &totals)).collect();
        let peak = (0..self.m).map(|i| f.iter().map(|c| c[i]).sum::<f64>()).fold(0.0, f64::max);
        let scale = (1.0 - INIT_SLACK) / peak.max(1.0);
        for c in &mut f {
            for v in c.iter_mut() {
                *v *= scale;
            }
        }
        f
    }

    /// `1 - sum_k F_k` with compensated summation, so small survivals keep
    /// their relative accuracy and successive gains telescope.
    pub(super) fn survival(&self, f: &[Vec<f64>], i: usize) -> f64 {
        let (mut sum, mut carry) = (1.0f64, 0.0f64);
        for c in f {
            let x = -c[i];
            let t = sum + x;
            carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
            sum = t;
        }
        sum + carry
    }

    pub(super) fn log_likelihood(&self, f: &[Vec<f64>]) -> f64 {
        let mut ll = 0.0;
        for (c, e) in f.iter().zip(&self.events) {
            ll += c.iter().zip(e).map(|(&v, &a)| xlogy(a, v)).sum::<f64>();
        }
        ll + (0..self.m).map(|i| xlogy(self.censored[i], self.survival(f, i))).sum::<f64>()
    }

    /// `log_likelihood(new) - log_likelihood(old)` without cancellation: each
    /// term is `count ln(1 + delta / old)` with `delta` formed from the
    /// differences of the components. Near the optimum the two likelihoods
    /// agree to rounding error while this difference keeps its sign.
    pub(super) fn gain(&self, old: &[Vec<f64>], new: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.m {
            let mut shift = 0.0;
            for k in 0..self.causes {
                let delta = new[k][i] - old[k][i];
                shift += delta;
                total += log_ratio(self.events[k][i], old[k][i], delta);
            }
            total += log_ratio(self.censored[i], self.survival(old, i), -shift);
        }
        total
    }

    /// One safeguarded projected Newton step for cause `k`.
    fn icm_step(&self, f: &mut [Vec<f64>], k: usize, settings: &SolverSettings) {
        let start = self.start[k];
        if start == self.m {
            return;
        }
        let eps = settings.floor_epsilon;
        let others: Vec<f64> = (0..self.m)
            .map(|i| f.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, c)| c[i]).sum())
            .collect();
        let room: Vec<f64> = others.iter().map(|o| 1.0 - o).collect();
        let cap = room[self.m - 1].max(0.0);
        let a = &self.events[k];
        let b = &self.censored;
        let x = &f[k];

        let mut active = Vec::with_capacity(self.m - start);
        let mut target = Vec::with_capacity(self.m - start);
        let mut weight = Vec::with_capacity(self.m - start);
        for i in start..self.m {
            if a[i] == 0 && b[i] == 0 {
                continue;
            }
            let xi = x[i].max(eps);
            let si = (room[i] - x[i]).max(eps);
            let grad = a[i] as f64 / xi - b[i] as f64 / si;
            let curv = a[i] as f64 / (xi * xi) + b[i] as f64 / (si * si);
            active.push(i);
            target.push(x[i] + grad / curv);
            weight.push(curv);
        }
        let fitted = pava(&target, &weight);
        let mut proposal = vec![0.0; self.m];
        let mut it = active.iter().zip(fitted).peekable();
        let mut last = 0.0;
        for (i, p) in proposal.iter_mut().enumerate().skip(start) {
            if let Some((_, v)) = it.next_if(|(&j, _)| j == i) {
                last = v.clamp(0.0, cap);
            }
            *p = last;
        }
        if proposal == *x {
            return;
        }

        let before = f.to_vec();
        let current = f[k].clone();
        let mut step = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            f[k] = if step == 1.0 {
                proposal.clone()
            } else {
                current.iter().zip(&proposal).map(|(&xi, &pi)| xi + step * (pi - xi)).collect()
            };
            if self.gain(&before, f) >= 0.0 {
                return;
            }
            step *= settings.contraction;
        }
        f[k] = current;
    }

    /// EM update of the total mass of each cause and of the survivors, applied
    /// by rescaling whole components.
    fn reallocate(&self, f: &mut [Vec<f64>]) {
        let last = self.m - 1;
        let mass: Vec<f64> = f.iter().map(|c| c[last]).collect();
        let q = (1.0 - mass.iter().sum::<f64>()).max(0.0);
        let mut new_mass: Vec<f64> = self.events.iter().map(|e| e.iter().sum::<u64>() as f64).collect();
        for i in 0..self.m {
            let b = self.censored[i];
            if b == 0 {
                continue;
            }
            let tails: Vec<f64> = f.iter().zip(&mass).map(|(c, &mk)| (mk - c[i]).max(0.0)).collect();
            let s = q + tails.iter().sum::<f64>();
            if s <= 0.0 {
                return;
            }
            let w = b as f64 / s;
            for (nm, t) in new_mass.iter_mut().zip(&tails) {
                *nm += w * t;
            }
        }
        let saved: Vec<Vec<f64>> = f.to_vec();
        for (c, (&old, &new)) in f.iter_mut().zip(mass.iter().zip(&new_mass)) {
            if old > 0.0 {
                let scale = (new / self.n) / old;
                c.iter_mut().for_each(|v| *v *= scale);
            }
        }
        if !(self.gain(&saved, f) >= 0.0) {
            f.clone_from_slice(&saved);
        }
    }
}

/// `count ln((old + delta) / old)` with the `0 ln 0` convention.
fn log_ratio(count: u64, old: f64, delta: f64) -> f64 {
    if count == 0 || delta == 0.0 {
        0.0
    } else if old <= 0.0 {
        if old + delta > 0.0 { f64::INFINITY } else { f64::NAN }
    } else if old + delta <= 0.0 {
        f64::NEG_INFINITY
    } else {
        count as f64 * (delta / old).ln_1p()
    }
}
