//! Observations, grouping schemes and the tally table of per-point status counts.
//!
//! Every estimator in this crate depends on the data only through a
//! [`TallyTable`]: for each support point `s` the number of subjects inspected
//! at `s` that had failed from cause `k = 1..=K`, plus the number still event
//! free. Counts are stored as integers; fractions are derived on demand.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One subject: inspection time and current status.
///
/// `status == 0` means the event had not occurred by `time`; `status == k`
/// for `k >= 1` means it had occurred, from cause `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub time: f64,
    pub status: usize,
}

impl Observation {
    pub fn new(time: f64, status: usize) -> Self {
        Self { time, status }
    }

    pub fn is_event(&self) -> bool {
        self.status != 0
    }
}

/// Which end points of an [`Interval`] belong to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Closure {
    /// `(a, b)`
    #[serde(rename = "oo")]
    Open,
    /// `(a, b]`
    #[serde(rename = "oc")]
    OpenClosed,
    /// `[a, b)`
    #[serde(rename = "co")]
    ClosedOpen,
    /// `[a, b]`
    #[serde(rename = "cc")]
    Closed,
}

impl Closure {
    pub fn lower_closed(self) -> bool {
        matches!(self, Closure::ClosedOpen | Closure::Closed)
    }

    pub fn upper_closed(self) -> bool {
        matches!(self, Closure::OpenClosed | Closure::Closed)
    }

    /// Two-letter code used in scheme files: `oo`, `oc`, `co`, `cc`.
    pub fn code(self) -> &'static str {
        match self {
            Closure::Open => "oo",
            Closure::OpenClosed => "oc",
            Closure::ClosedOpen => "co",
            Closure::Closed => "cc",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "oo" => Some(Closure::Open),
            "oc" => Some(Closure::OpenClosed),
            "co" => Some(Closure::ClosedOpen),
            "cc" => Some(Closure::Closed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub closure: Closure,
}

impl Interval {
    pub fn new(lower: f64, upper: f64, closure: Closure) -> Self {
        Self { lower, upper, closure }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.closure.lower_closed() { x >= self.lower } else { x > self.lower };
        let below = if self.closure.upper_closed() { x <= self.upper } else { x < self.upper };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        match self.lower.partial_cmp(&self.upper) {
            Some(Ordering::Less) => false,
            Some(Ordering::Equal) => self.closure != Closure::Closed,
            _ => true,
        }
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Disjoint ordered intervals, each with a representative point inside it.
///
/// Observation times falling in interval `I` are recorded as `m(I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingScheme {
    intervals: Vec<Interval>,
    representatives: Vec<f64>,
}

impl GroupingScheme {
    /// Builds a scheme, sorting cells by representative and checking that the
    /// cells are nonempty, pairwise disjoint and contain their representative.
    pub fn new(cells: Vec<(Interval, f64)>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidScheme("no intervals".into()));
        }
        let mut cells = cells;
        for (interval, rep) in &cells {
            if interval.lower.is_nan() || interval.upper.is_nan() || !rep.is_finite() {
                return Err(Error::InvalidScheme(
                    "bounds must not be NaN and representatives must be finite".into(),
                ));
            }
            if interval.is_empty() {
                return Err(Error::InvalidScheme(format!(
                    "interval ({}, {}) is empty",
                    interval.lower, interval.upper
                )));
            }
            if !interval.contains(*rep) {
                return Err(Error::InvalidScheme(format!(
                    "representative {} lies outside its interval ({}, {})",
                    rep, interval.lower, interval.upper
                )));
            }
        }
        cells.sort_by(|a, b| a.1.total_cmp(&b.1));
        for pair in cells.windows(2) {
            let (left, lrep) = pair[0];
            let (right, rrep) = pair[1];
            if lrep >= rrep {
                return Err(Error::InvalidScheme(format!("duplicate representative {rrep}")));
            }
            let disjoint = left.upper < right.lower
                || (left.upper == right.lower
                    && !(left.closure.upper_closed() && right.closure.lower_closed()));
            if !disjoint {
                return Err(Error::InvalidScheme(format!(
                    "intervals around {lrep} and {rrep} overlap"
                )));
            }
        }
        let (intervals, representatives) = cells.into_iter().unzip();
        Ok(Self { intervals, representatives })
    }

    /// Consecutive cells `(b_0, b_1], (b_1, b_2], ...` with midpoints as representatives.
    pub fn from_breaks(breaks: &[f64], closure: Closure) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidScheme("need at least two break points".into()));
        }
        let cells = breaks
            .windows(2)
            .map(|w| (Interval::new(w[0], w[1], closure), 0.5 * (w[0] + w[1])))
            .collect();
        Self::new(cells)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn representatives(&self) -> &[f64] {
        &self.representatives
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Index of the cell containing `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        // Cells are ordered and disjoint: only the last two cells starting at
        // or before x can contain it (two when x sits on a shared boundary).
        let idx = self.intervals.partition_point(|iv| iv.lower <= x);
        [idx.checked_sub(1), idx.checked_sub(2)]
            .into_iter()
            .flatten()
            .find(|&i| self.intervals[i].contains(x))
    }

    /// Rounds a raw observation time to its cell representative.
    pub fn round(&self, x: f64) -> Result<f64> {
        self.locate(x)
            .map(|i| self.representatives[i])
            .ok_or(Error::UncoveredTime(x))
    }
}

/// Per-support-point status counts: the sufficient statistic for every estimator.
///
/// `counts[i][k - 1]` is the number of subjects inspected at `support[i]` who
/// had failed from cause `k`; `counts[i][K]` is the number still event free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyTable {
    support: Vec<f64>,
    counts: Vec<Vec<u64>>,
    n: u64,
    causes: usize,
}

impl TallyTable {
    pub fn new(support: Vec<f64>, counts: Vec<Vec<u64>>, causes: usize) -> Result<Self> {
        if causes == 0 {
            return Err(Error::InvalidArgument("number of causes must be at least 1".into()));
        }
        if support.len() != counts.len() {
            return Err(Error::InvalidArgument("support and counts differ in length".into()));
        }
        if support.is_empty() {
            return Err(Error::NoObservations);
        }
        if support.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("support points must be finite".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("support must be strictly increasing".into()));
        }
        if counts.iter().any(|row| row.len() != causes + 1) {
            return Err(Error::InvalidArgument(format!(
                "each count row needs {} entries",
                causes + 1
            )));
        }
        let n = counts.iter().flatten().sum();
        if n == 0 {
            return Err(Error::NoObservations);
        }
        Ok(Self { support, counts, n, causes })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of competing risks `K`.
    pub fn causes(&self) -> usize {
        self.causes
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Count for cause `k` (1-based) at support index `i`.
    pub fn count(&self, i: usize, k: usize) -> u64 {
        self.counts[i][k - 1]
    }

    /// Number still event free at support index `i`.
    pub fn censored(&self, i: usize) -> u64 {
        self.counts[i][self.causes]
    }

    pub fn total(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    /// `total(i) / n`, the empirical mass of the point.
    pub fn fraction(&self, i: usize) -> f64 {
        self.total(i) as f64 / self.n as f64
    }

    /// Index of a support point, matched bit-for-bit.
    pub fn index_of(&self, point: f64) -> Option<usize> {
        self.support
            .binary_search_by(|s| s.total_cmp(&point))
            .ok()
            .filter(|&i| self.support[i].to_bits() == point.to_bits())
    }

    /// Index of the largest support point `<= point`.
    pub fn index_at_or_before(&self, point: f64) -> Option<usize> {
        let idx = self.support.partition_point(|&s| s <= point);
        idx.checked_sub(1)
    }

    /// Event count of cause `k` and total at each point, as used by the
    /// reduced current status problem for that cause.
    pub fn marginal(&self, k: usize) -> Vec<(u64, u64)> {
        (0..self.len()).map(|i| (self.count(i, k), self.total(i))).collect()
    }

    /// Expands the table back into one observation per subject in canonical order.
    pub fn observations(&self) -> Vec<Observation> {
        let mut out = Vec::with_capacity(self.n as usize);
        for (i, &s) in self.support.iter().enumerate() {
            for status in 0..=self.causes {
                let c = if status == 0 { self.censored(i) } else { self.count(i, status) };
                out.extend(std::iter::repeat_n(Observation::new(s, status), c as usize));
            }
        }
        out
    }
}

fn validate(observations: &[Observation], causes: usize) -> Result<()> {
    if observations.is_empty() {
        return Err(Error::NoObservations);
    }
    if causes == 0 {
        return Err(Error::InvalidArgument("number of causes must be at least 1".into()));
    }
    for obs in observations {
        if !obs.time.is_finite() {
            return Err(Error::NonFiniteTime(obs.time));
        }
        if obs.status > causes {
            return Err(Error::InvalidCause { status: obs.status, causes });
        }
    }
    Ok(())
}

fn tally_times(keyed: impl Iterator<Item = (f64, usize)>, len: usize, causes: usize) -> TallyTable {
    let mut keyed: Vec<(f64, usize)> = keyed.collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut support: Vec<f64> = Vec::new();
    let mut counts: Vec<Vec<u64>> = Vec::new();
    for (time, status) in keyed {
        if support.last().map(|s: &f64| s.to_bits()) != Some(time.to_bits()) {
            support.push(time);
            counts.push(vec![0; causes + 1]);
        }
        let row = counts.last_mut().expect("row pushed above");
        let slot = if status == 0 { causes } else { status - 1 };
        row[slot] += 1;
    }
    let n = len as u64;
    TallyTable { support, counts, n, causes }
}

/// Tallies observations at their exact (bit-identical) times.
pub fn tally_discrete(observations: &[Observation], causes: usize) -> Result<TallyTable> {
    validate(observations, causes)?;
    Ok(tally_times(
        observations.iter().map(|o| (o.time, o.status)),
        observations.len(),
        causes,
    ))
}

/// Rounds each observation time to its cell representative, then tallies.
///
/// Times that already equal a representative map to themselves, since every
/// representative lies inside its own cell.
pub fn tally_grouped(
    observations: &[Observation],
    scheme: &GroupingScheme,
    causes: usize,
) -> Result<TallyTable> {
    validate(observations, causes)?;
    let rounded = observations
        .iter()
        .map(|o| scheme.round(o.time).map(|d| (d, o.status)))
        .collect::<Result<Vec<_>>>()?;
    Ok(tally_times(rounded.into_iter(), observations.len(), causes))
}

/// How inspection times relate to the support of the estimators.
///
/// The smooth and discrete models tally exact times; they differ only in how
/// estimates are interpreted and which intervals are valid. The grouped model
/// rounds times into cells first.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Smooth,
    Discrete,
    Grouped(GroupingScheme),
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Smooth => "smooth",
            Model::Discrete => "discrete",
            Model::Grouped(_) => "grouped",
        }
    }

    pub fn tally(&self, observations: &[Observation], causes: usize) -> Result<TallyTable> {
        match self {
            Model::Smooth | Model::Discrete => tally_discrete(observations, causes),
            Model::Grouped(scheme) => tally_grouped(observations, scheme, causes),
        }
    }
}
