use rand::Rng;
use rayon::prelude::*;

use super::{check_level, CiMeta, CiMethod, ConfidenceInterval};
use crate::data::{Model, Observation, TallyTable};
use crate::error::{Error, Result};
use crate::estimators::{fit, EstimatorKind, SolverSettings};
use crate::rng::stream_rng;

/// A `(point, cause)` pair at which an interval is wanted.
pub type BootstrapTarget = (f64, usize);

/// Symmetric bootstrap intervals `theta_hat -/+ q` at several targets from one
/// set of resamples.
///
/// Each resample draws `n` subjects with replacement from the tally (the
/// sufficient statistic, so observation order is irrelevant) and refits the
/// estimator. `q` is the `ceil(B level)`-th smallest absolute deviation
/// `|theta*_b - theta_hat|`. A target point missing from a resample takes the
/// value at the largest support point before it (0 if none). Resample `b`
/// uses stream `b` of `seed`, so the result is independent of scheduling.
pub fn bootstrap_intervals(
    tally: &TallyTable,
    kind: EstimatorKind,
    targets: &[BootstrapTarget],
    level: f64,
    resamples: usize,
    seed: u64,
    settings: &SolverSettings,
) -> Result<Vec<ConfidenceInterval>> {
    check_level(level)?;
    if resamples == 0 {
        return Err(Error::InvalidArgument("need at least one bootstrap resample".into()));
    }
    for &(s, k) in targets {
        if tally.index_of(s).is_none() {
            return Err(Error::PointNotInSupport(s));
        }
        if !(1..=tally.causes()).contains(&k) {
            return Err(Error::InvalidArgument(format!("cause {k} out of range")));
        }
    }
    let original = fit(tally, kind, settings)?;
    let centers: Vec<f64> = targets.iter().map(|&(s, k)| original.at(s, k)).collect();

    // Cell of each subject in canonical order: (support index, status slot).
    let cells: Vec<(usize, usize)> = (0..tally.len())
        .flat_map(|i| {
            tally.counts()[i]
                .iter()
                .enumerate()
                .flat_map(move |(slot, &c)| std::iter::repeat_n((i, slot), c as usize))
        })
        .collect();

    let replicates: Vec<Vec<f64>> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let resampled = resample(tally, &cells, &mut rng);
            let est = fit(&resampled, kind, settings)?;
            Ok(targets.iter().map(|&(s, k)| est.at(s, k)).collect())
        })
        .collect::<Result<_>>()?;

    let rank = ((resamples as f64 * level).ceil() as usize).clamp(1, resamples);
    Ok(targets
        .iter()
        .enumerate()
        .map(|(j, &(s, k))| {
            let mut dev: Vec<f64> = replicates.iter().map(|r| (r[j] - centers[j]).abs()).collect();
            dev.sort_by(f64::total_cmp);
            let q = dev[rank - 1];
            ConfidenceInterval {
                point: s,
                cause: k,
                level,
                estimate: centers[j],
                lower: centers[j] - q,
                upper: centers[j] + q,
                method: CiMethod::Bootstrap,
                meta: CiMeta { resamples: Some(resamples), ..CiMeta::default() },
            }
        })
        .collect())
}

fn resample(tally: &TallyTable, cells: &[(usize, usize)], rng: &mut impl Rng) -> TallyTable {
    let width = tally.causes() + 1;
    let mut counts = vec![vec![0u64; width]; tally.len()];
    for _ in 0..cells.len() {
        let (i, slot) = cells[rng.random_range(0..cells.len())];
        counts[i][slot] += 1;
    }
    let (support, counts): (Vec<f64>, Vec<Vec<u64>>) = tally
        .support()
        .iter()
        .zip(counts)
        .filter(|(_, row)| row.iter().any(|&c| c > 0))
        .map(|(&s, row)| (s, row))
        .unzip();
    TallyTable::new(support, counts, tally.causes()).expect("resample of a valid table")
}

/// Bootstrap interval for one `(s, k)` from raw observations.
#[allow(clippy::too_many_arguments)]
pub fn ci_bootstrap(
    observations: &[Observation],
    model: &Model,
    causes: usize,
    kind: EstimatorKind,
    s: f64,
    k: usize,
    level: f64,
    resamples: usize,
    seed: u64,
    settings: &SolverSettings,
) -> Result<ConfidenceInterval> {
    let tally = model.tally(observations, causes)?;
    let mut out = bootstrap_intervals(&tally, kind, &[(s, k)], level, resamples, seed, settings)?;
    Ok(out.remove(0))
}
