//! Support reduction steps in the mass parametrization.
//!
//! With `p_kj` the jump of cause `k` at support point `j` and `q` the mass
//! beyond the support, every observation probability is linear in the masses
//! and the likelihood is that of a finite mixture. Maximizing
//! `sum_r w_r ln(A_r p) - n sum p` over the cone `p >= 0` gives the same
//! optimum with the sum-to-one constraint satisfied automatically. Each step
//! adds the atom with the steepest positive directional derivative, takes a
//! Newton step on the current support from the quadratic model, and drops
//! atoms that the step would make negative. Boundary atoms are thus removed
//! exactly instead of being approached geometrically, which is where block
//! ascent slows down.

use nalgebra::{DMatrix, DVector};

use super::mle::Problem;

const MAX_BACKTRACKS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Atom {
    Jump { cause: usize, at: usize },
    Survivor,
}

#[derive(Debug, Clone, Copy)]
enum Row {
    Event { cause: usize, at: usize },
    Censored { at: usize },
}

impl Row {
    fn covers(self, atom: Atom) -> bool {
        match (self, atom) {
            (Row::Event { cause, at }, Atom::Jump { cause: c, at: j }) => c == cause && j <= at,
            (Row::Event { .. }, Atom::Survivor) => false,
            (Row::Censored { at }, Atom::Jump { at: j, .. }) => j > at,
            (Row::Censored { .. }, Atom::Survivor) => true,
        }
    }
}

pub(super) struct Polisher<'a> {
    problem: &'a Problem,
    atoms: Vec<Atom>,
    rows: Vec<(Row, f64)>,
}

impl<'a> Polisher<'a> {
    /// Jumps are only allowed at or after the first event of their cause and
    /// at points carrying information on that cause, matching the
    /// conventions of the block updates.
    pub(super) fn new(problem: &'a Problem) -> Self {
        let mut atoms = Vec::new();
        for k in 0..problem.causes {
            for j in problem.start[k]..problem.m {
                if problem.events[k][j] > 0 || problem.censored[j] > 0 {
                    atoms.push(Atom::Jump { cause: k, at: j });
                }
            }
        }
        atoms.push(Atom::Survivor);
        let mut rows = Vec::new();
        for i in 0..problem.m {
            for k in 0..problem.causes {
                if problem.events[k][i] > 0 {
                    rows.push((Row::Event { cause: k, at: i }, problem.events[k][i] as f64));
                }
            }
            if problem.censored[i] > 0 {
                rows.push((Row::Censored { at: i }, problem.censored[i] as f64));
            }
        }
        Self { problem, atoms, rows }
    }

    fn masses(&self, f: &[Vec<f64>]) -> Vec<f64> {
        let last = self.problem.m - 1;
        self.atoms
            .iter()
            .map(|&atom| match atom {
                Atom::Jump { cause, at } => {
                    let prev = if at == 0 { 0.0 } else { f[cause][at - 1] };
                    (f[cause][at] - prev).max(0.0)
                }
                Atom::Survivor => self.problem.survival(f, last).max(0.0),
            })
            .collect()
    }

    fn components(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let total: f64 = p.iter().sum();
        let mut jumps = vec![vec![0.0; self.problem.m]; self.problem.causes];
        for (&atom, &mass) in self.atoms.iter().zip(p) {
            if let Atom::Jump { cause, at } = atom {
                jumps[cause][at] = mass / total;
            }
        }
        for c in &mut jumps {
            let mut acc = 0.0;
            for v in c.iter_mut() {
                acc += *v;
                *v = acc;
            }
        }
        jumps
    }

    fn row_values(&self, p: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|&(row, _)| self.atoms.iter().zip(p).filter(|(a, _)| row.covers(**a)).map(|(_, m)| m).sum())
            .collect()
    }

    /// One support reduction step on `f`. Returns whether the likelihood
    /// strictly increased; `f` is only replaced by a point at least as good.
    pub(super) fn step(&self, f: &mut Vec<Vec<f64>>) -> bool {
        let n = self.problem.n;
        let p0 = self.masses(f);
        if self.problem.log_likelihood(f) == f64::NEG_INFINITY {
            return false;
        }
        let y = self.row_values(&p0);
        let derivative: Vec<f64> = self
            .atoms
            .iter()
            .map(|&atom| {
                self.rows
                    .iter()
                    .zip(&y)
                    .filter(|((row, _), _)| row.covers(atom))
                    .map(|((_, w), yr)| w / yr)
                    .sum::<f64>()
            })
            .collect();

        let mut support: Vec<usize> = (0..self.atoms.len()).filter(|&a| p0[a] > 0.0).collect();
        let entering = (0..self.atoms.len())
            .filter(|&a| p0[a] == 0.0 && derivative[a] > n)
            .max_by(|&a, &b| derivative[a].total_cmp(&derivative[b]));
        if let Some(a) = entering {
            support.push(a);
            support.sort_unstable();
        }

        // Quadratic model at p0: minimize sum_r w_r/2 (A_r p / y_r - 2)^2 + n sum p.
        let mut current = p0.clone();
        let target = loop {
            let Some(newton) = self.newton(&support, &y) else {
                return false;
            };
            let negative: Vec<(usize, f64)> = support
                .iter()
                .zip(newton.iter())
                .filter(|(_, &v)| v < 0.0)
                .map(|(&a, &v)| (a, current[a] / (current[a] - v)))
                .collect();
            if negative.is_empty() {
                let mut full = vec![0.0; self.atoms.len()];
                for (&a, &v) in support.iter().zip(newton.iter()) {
                    full[a] = v;
                }
                break full;
            }
            let alpha = negative.iter().map(|&(_, t)| t).fold(f64::INFINITY, f64::min);
            for (&a, &v) in support.iter().zip(newton.iter()) {
                current[a] += alpha * (v - current[a]);
            }
            for &(a, t) in &negative {
                if t <= alpha {
                    current[a] = 0.0;
                }
            }
            support.retain(|&a| current[a] > 0.0);
            if support.is_empty() {
                return false;
            }
        };

        let mut scale = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = if scale == 1.0 {
                target.clone()
            } else {
                p0.iter().zip(&target).map(|(&a, &b)| a + scale * (b - a)).collect()
            };
            let candidate = self.components(&trial);
            let gain = self.problem.gain(f, &candidate);
            if gain >= 0.0 {
                *f = candidate;
                return gain > 0.0;
            }
            scale *= 0.5;
        }
        false
    }

    fn newton(&self, support: &[usize], y: &[f64]) -> Option<Vec<f64>> {
        let rows = self.rows.len();
        let cols = support.len();
        let mut design = DMatrix::<f64>::zeros(rows, cols);
        let mut rhs = DVector::<f64>::zeros(cols);
        for (r, (&(row, w), &yr)) in self.rows.iter().zip(y).enumerate() {
            let root = w.sqrt();
            for (c, &a) in support.iter().enumerate() {
                if row.covers(self.atoms[a]) {
                    design[(r, c)] = root / yr;
                    rhs[c] += 2.0 * w / yr;
                }
            }
        }
        rhs.add_scalar_mut(-self.problem.n);
        let gram = design.transpose() * &design;
        let solution = match gram.clone().cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => gram.svd(true, true).solve(&rhs, 1e-12).ok()?,
        };
        solution.iter().all(|v| v.is_finite()).then(|| solution.iter().copied().collect())
    }
}
