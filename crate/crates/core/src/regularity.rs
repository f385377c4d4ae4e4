//! Regular points: where every cumulative incidence is either zero or strictly
//! increasing across the neighbouring support points.
//!
//! At such points the constrained estimators coincide with the per-point
//! ratio estimator with probability tending to one, which is what makes the
//! normal limit usable. Classification applies to a candidate function
//! (usually the true one in simulations), never to raw data.

use serde::{Deserialize, Serialize};

/// Whether the supplied support is the full support of the observation-time
/// law, so its end points are its infimum and supremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupportExtent {
    Complete,
    /// Only part of the support is known; end points have an unknown outer
    /// neighbour and can only be regular through the all-zero case.
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regularity {
    /// All components are zero at the point.
    AllZero,
    /// Interior point with strict increase on both sides for every nonzero component.
    Interior,
    /// Infimum or supremum of the support satisfying the one-sided condition.
    Boundary,
    NotRegular(Violation),
}

impl Regularity {
    pub fn is_regular(self) -> bool {
        !matches!(self, Regularity::NotRegular(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Some nonzero component is not strictly above its value at the left neighbour.
    pub flat_from_left: bool,
    /// Some nonzero component is not strictly below its value at the right neighbour.
    pub flat_to_right: bool,
    /// The point is an end of a partial support.
    pub unknown_neighbour: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityFlags {
    pub support: Vec<f64>,
    pub flags: Vec<Regularity>,
}

impl RegularityFlags {
    pub fn is_regular(&self, i: usize) -> bool {
        self.flags[i].is_regular()
    }

    pub fn regular_points(&self) -> impl Iterator<Item = f64> + '_ {
        self.support.iter().zip(&self.flags).filter(|(_, f)| f.is_regular()).map(|(s, _)| *s)
    }
}

/// Classifies every support point of a candidate `values[i][k]` (point `i`,
/// cause `k`, 0-based), assumed componentwise nondecreasing.
pub fn classify_regular(
    support: &[f64],
    values: &[Vec<f64>],
    extent: SupportExtent,
) -> RegularityFlags {
    assert_eq!(support.len(), values.len(), "one value vector per support point");
    let m = support.len();
    let flags = (0..m)
        .map(|i| {
            let here = &values[i];
            if here.iter().all(|&v| v == 0.0) {
                return Regularity::AllZero;
            }
            let strict = |lo: &[f64], hi: &[f64]| {
                here.iter().enumerate().all(|(k, &v)| v == 0.0 || lo[k] < hi[k])
            };
            let is_inf = i == 0;
            let is_sup = i + 1 == m;
            let flat_from_left = !is_inf && !strict(&values[i - 1], here);
            let flat_to_right = !is_sup && !strict(here, &values[i + 1]);
            let unknown_neighbour = extent == SupportExtent::Partial && (is_inf || is_sup);
            if flat_from_left || flat_to_right || unknown_neighbour {
                Regularity::NotRegular(Violation { flat_from_left, flat_to_right, unknown_neighbour })
            } else if is_inf || is_sup {
                Regularity::Boundary
            } else {
                Regularity::Interior
            }
        })
        .collect();
    RegularityFlags { support: support.to_vec(), flags }
}
