use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_dataset, ObservationLaw, SimulationConfig};
use crate::error::{Error, Result};
use crate::estimators::{fit, EstimatorKind, SolverSettings};
use crate::inference::{
    bootstrap_intervals, ci_likelihood_ratio, ci_normal, default_critical_value, CiMethod, ConfidenceInterval,
};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSettings {
    pub methods: Vec<CiMethod>,
    /// Estimators for the normal and bootstrap intervals; likelihood ratio
    /// intervals always use the naive estimator.
    pub estimators: Vec<EstimatorKind>,
    pub level: f64,
    pub resamples: usize,
    /// Likelihood ratio critical value; the packaged default for `level` if
    /// absent.
    pub critical_value: Option<f64>,
    pub clip: bool,
    pub solver: SolverSettings,
}

impl Default for CoverageSettings {
    fn default() -> Self {
        Self {
            methods: vec![CiMethod::Normal, CiMethod::Bootstrap],
            estimators: vec![EstimatorKind::Mle, EstimatorKind::Naive],
            level: 0.95,
            resamples: 200,
            critical_value: None,
            clip: false,
            solver: SolverSettings::default(),
        }
    }
}

/// Coverage summary for one `(point, cause, method, estimator)`.
///
/// Replications in which the interval is undefined (no observations at the
/// point for normal intervals, point absent from the support for bootstrap
/// intervals) are counted in `undefined` and excluded from the averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub point: f64,
    pub cause: usize,
    pub method: CiMethod,
    pub estimator: EstimatorKind,
    pub true_value: f64,
    pub coverage: f64,
    pub mean_width: f64,
    /// `sqrt(p (1 - p) / replications)`.
    pub mc_se: f64,
    pub replications: usize,
    pub undefined: usize,
    pub mean_estimate: f64,
    /// Mean plug-in variance `F(1 - F) / (total / n)`; normal intervals only.
    pub mean_plugin_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub label: String,
    pub model: String,
    /// Grid points or cells of the observation law; absent when continuous.
    pub points_per_grid: Option<usize>,
    pub n: usize,
    pub replications: usize,
    pub level: f64,
    pub critical_value: Option<f64>,
    pub rows: Vec<CoverageRow>,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    point: f64,
    cause: usize,
    method: CiMethod,
    estimator: EstimatorKind,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    lower: f64,
    upper: f64,
    estimate: f64,
    plugin_variance: Option<f64>,
}

impl From<&ConfidenceInterval> for Outcome {
    fn from(ci: &ConfidenceInterval) -> Self {
        Outcome { lower: ci.lower, upper: ci.upper, estimate: ci.estimate, plugin_variance: None }
    }
}

/// Simulates `config.replications` datasets and records, for every
/// evaluation point, cause, method and estimator, how often the interval
/// covers the true value.
///
/// Replication `r` uses dataset stream `r` and bootstrap seed derived from
/// `(seed, r)`, so the report does not depend on the number of threads.
pub fn coverage_experiment(config: &SimulationConfig, settings: &CoverageSettings) -> Result<CoverageReport> {
    config.validate()?;
    if settings.methods.is_empty() {
        return Err(Error::InvalidArgument("no interval methods requested".into()));
    }
    if settings.methods.iter().any(|m| *m != CiMethod::LikelihoodRatio) && settings.estimators.is_empty() {
        return Err(Error::InvalidArgument("no estimators requested".into()));
    }
    if !(settings.level > 0.0 && settings.level < 1.0) {
        return Err(Error::InvalidArgument("level must lie in (0, 1)".into()));
    }
    let critical_value = if settings.methods.contains(&CiMethod::LikelihoodRatio) {
        Some(match settings.critical_value {
            Some(c) => c,
            None => {
                default_critical_value(settings.level)
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("no packaged critical value for level {}", settings.level))
                    })?
                    .value
            }
        })
    } else {
        None
    };
    if settings.methods.contains(&CiMethod::Bootstrap) && settings.resamples == 0 {
        return Err(Error::InvalidArgument("bootstrap needs at least one resample".into()));
    }

    let causes = config.causes();
    let mut slots = Vec::new();
    for &point in &config.evaluation_points {
        for cause in 1..=causes {
            for &method in &settings.methods {
                if method == CiMethod::LikelihoodRatio {
                    slots.push(Slot { point, cause, method, estimator: EstimatorKind::Naive });
                } else {
                    for &estimator in &settings.estimators {
                        slots.push(Slot { point, cause, method, estimator });
                    }
                }
            }
        }
    }

    let model = config.observation.model()?;
    let outcomes: Vec<Vec<Option<Outcome>>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let data = generate_dataset(config, r)?;
            let tally = model.tally(&data, causes)?;
            let mut out: Vec<Option<Outcome>> = vec![None; slots.len()];
            for &estimator in &settings.estimators {
                let wanted = |m: CiMethod| settings.methods.contains(&m);
                if !(wanted(CiMethod::Normal) || wanted(CiMethod::Bootstrap)) {
                    break;
                }
                let est = fit(&tally, estimator, &settings.solver)?;
                if wanted(CiMethod::Normal) {
                    for (j, slot) in slots.iter().enumerate() {
                        if slot.method != CiMethod::Normal || slot.estimator != estimator {
                            continue;
                        }
                        let Some(i) = tally.index_of(slot.point).filter(|&i| tally.total(i) > 0) else {
                            continue;
                        };
                        let ci = ci_normal(&tally, &est, slot.point, slot.cause, settings.level, settings.clip)?;
                        let f = ci.estimate;
                        let mut o = Outcome::from(&ci);
                        o.plugin_variance = Some(f * (1.0 - f) / tally.fraction(i));
                        out[j] = Some(o);
                    }
                }
                if wanted(CiMethod::Bootstrap) {
                    let chosen: Vec<usize> = (0..slots.len())
                        .filter(|&j| {
                            slots[j].method == CiMethod::Bootstrap
                                && slots[j].estimator == estimator
                                && tally.index_of(slots[j].point).is_some()
                        })
                        .collect();
                    if !chosen.is_empty() {
                        let targets: Vec<(f64, usize)> =
                            chosen.iter().map(|&j| (slots[j].point, slots[j].cause)).collect();
                        let seed = derive_seed(config.seed, r as u64);
                        let cis = bootstrap_intervals(
                            &tally,
                            estimator,
                            &targets,
                            settings.level,
                            settings.resamples,
                            seed,
                            &settings.solver,
                        )?;
                        for (&j, ci) in chosen.iter().zip(&cis) {
                            out[j] = Some(Outcome::from(ci));
                        }
                    }
                }
            }
            if let Some(c) = critical_value {
                for (j, slot) in slots.iter().enumerate() {
                    if slot.method == CiMethod::LikelihoodRatio {
                        let ci = ci_likelihood_ratio(&tally, slot.cause, slot.point, settings.level, c)?;
                        out[j] = Some(Outcome::from(&ci));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let rows = slots
        .iter()
        .enumerate()
        .map(|(j, slot)| {
            let truth = config.true_value(slot.point, slot.cause);
            let defined: Vec<Outcome> = outcomes.iter().filter_map(|o| o[j]).collect();
            let count = defined.len();
            let mean = |f: &dyn Fn(&Outcome) -> f64| {
                if count == 0 {
                    f64::NAN
                } else {
                    defined.iter().map(f).sum::<f64>() / count as f64
                }
            };
            let coverage = mean(&|o| f64::from(o.lower <= truth && truth <= o.upper));
            CoverageRow {
                point: slot.point,
                cause: slot.cause,
                method: slot.method,
                estimator: slot.estimator,
                true_value: truth,
                coverage,
                mean_width: mean(&|o| o.upper - o.lower),
                mc_se: (coverage * (1.0 - coverage) / count as f64).sqrt(),
                replications: count,
                undefined: config.replications - count,
                mean_estimate: mean(&|o| o.estimate),
                mean_plugin_variance: (slot.method == CiMethod::Normal)
                    .then(|| mean(&|o| o.plugin_variance.unwrap_or(f64::NAN))),
            }
        })
        .collect();

    Ok(CoverageReport {
        label: default_label(&config.observation),
        model: model.name().to_string(),
        points_per_grid: config.observation.points(),
        n: config.n,
        replications: config.replications,
        level: settings.level,
        critical_value,
        rows,
    })
}

fn default_label(law: &ObservationLaw) -> String {
    match law {
        ObservationLaw::Grid { points } => format!("grid of {} points", points.len()),
        ObservationLaw::Uniform { lower, upper } => format!("uniform on [{lower}, {upper}]"),
        ObservationLaw::Grouped { breaks, .. } => format!("{} cells", breaks.len().saturating_sub(1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::EventLaw;

    #[test]
    fn never_occurring_event_is_always_covered() {
        let config = SimulationConfig {
            cause_probabilities: vec![0.0, 0.0],
            event_laws: vec![EventLaw::Gamma { shape: 5.0, scale: 3.0 }, EventLaw::Gamma { shape: 9.0, scale: 2.0 }],
            observation: SimulationConfig::grid_with_gap(10.0),
            n: 50,
            replications: 20,
            seed: 1,
            evaluation_points: vec![10.0, 20.0, 30.0],
        };
        let settings = CoverageSettings { resamples: 10, ..Default::default() };
        let report = coverage_experiment(&config, &settings).unwrap();
        assert_eq!(report.rows.len(), 3 * 2 * 2 * 2);
        for row in &report.rows {
            assert_eq!(row.coverage, 1.0);
            assert_eq!(row.mean_width, 0.0);
            assert_eq!(row.mean_estimate, 0.0);
        }
    }

    #[test]
    fn rejects_points_off_the_grid() {
        let mut config = SimulationConfig::two_gamma_causes(SimulationConfig::grid_with_gap(10.0), 50, 2, 1);
        config.evaluation_points = vec![15.0];
        assert!(coverage_experiment(&config, &CoverageSettings::default()).is_err());
    }

    #[test]
    fn independent_of_thread_count() {
        let config = SimulationConfig::two_gamma_causes(SimulationConfig::grid_with_gap(2.0), 200, 6, 8);
        let settings = CoverageSettings { resamples: 20, ..Default::default() };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| coverage_experiment(&config, &settings).unwrap());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let parallel = pool.install(|| coverage_experiment(&config, &settings).unwrap());
        assert_eq!(format!("{serial:?}"), format!("{parallel:?}"));
    }
}
