use std::path::PathBuf;

use clap::Args;
use csrisk_core::data::Model;
use csrisk_core::error::Error;
use csrisk_core::estimators::{fit, EstimatorKind, SolverSettings, StepEstimate};
use csrisk_core::inference::{
    bootstrap_intervals, ci_likelihood_ratio, ci_normal, default_critical_value, CiMethod, ConfidenceInterval,
};
use serde::Serialize;

use super::{dedup, EstimatorArg, MethodArg};
use crate::input::{DataArgs, SolverArgs};
use crate::output::{num, round12, write_json, Csv, RunManifest};
use crate::CliError;

#[derive(Debug, Args)]
pub struct CiArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Interval methods (comma separated).
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub method: Vec<MethodArg>,
    /// Estimators for normal and bootstrap intervals (comma separated).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "mle")]
    pub estimator: Vec<EstimatorArg>,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Bootstrap resamples.
    #[arg(short = 'B', long = "resamples", default_value_t = 200)]
    pub resamples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Critical value for likelihood ratio intervals; the packaged value for
    /// the level if omitted.
    #[arg(long)]
    pub critical_value: Option<f64>,
    /// Intersect normal and bootstrap intervals with [0, 1].
    #[arg(long)]
    pub clip: bool,
    /// Evaluation points (comma separated); all support points if omitted.
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<f64>>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory for `intervals.csv` and `intervals.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct IntervalRow {
    point: f64,
    cause: usize,
    method: CiMethod,
    estimator: EstimatorKind,
    level: f64,
    estimate: Option<f64>,
    lower: Option<f64>,
    upper: Option<f64>,
}

#[derive(Serialize)]
struct RowError {
    point: f64,
    cause: usize,
    method: CiMethod,
    estimator: EstimatorKind,
    message: String,
}

#[derive(Serialize)]
struct Report<'a> {
    manifest: &'a RunManifest,
    intervals: Vec<IntervalRow>,
    row_errors: Vec<RowError>,
}

type Slot = (f64, usize, CiMethod, EstimatorKind);

fn estimate_for(
    tally: &csrisk_core::data::TallyTable,
    kind: EstimatorKind,
    settings: &SolverSettings,
) -> Result<StepEstimate, CliError> {
    fit(tally, kind, settings).map_err(|e| match e {
        Error::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
        other => CliError::Input(other.to_string()),
    })
}

pub fn run(args: &CiArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("ci");
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(CliError::Input("--level must lie in (0, 1)".into()));
    }
    let settings = args.solver.settings()?;
    let methods: Vec<CiMethod> = dedup(&args.method).into_iter().map(Into::into).collect();
    let kinds: Vec<EstimatorKind> = dedup(&args.estimator).into_iter().map(Into::into).collect();
    let resampling = methods.contains(&CiMethod::Bootstrap);
    if resampling && args.resamples == 0 {
        return Err(CliError::Input("-B must be at least 1".into()));
    }
    manifest.methods = methods.iter().map(|m| m.to_string()).collect();
    manifest.estimators = kinds.iter().map(|k| k.to_string()).collect();
    manifest.level = Some(args.level);
    if resampling {
        manifest.resamples = Some(args.resamples);
        manifest.seed = Some(args.seed);
    }
    manifest.settings = Some(serde_json::json!({ "solver": settings, "clip": args.clip, "points": args.points }));
    let loaded = args.data.load(&mut manifest)?;
    let tally = &loaded.tally;
    let smooth = loaded.model == Model::Smooth;

    let critical_value = if methods.contains(&CiMethod::LikelihoodRatio) {
        if !smooth {
            manifest.warn(format!(
                "likelihood ratio intervals requested for the {} model; their calibration assumes the smooth model",
                loaded.model.name()
            ));
        }
        let (value, provenance) = match args.critical_value {
            Some(c) if c >= 0.0 => (c, "supplied with --critical-value".to_string()),
            Some(_) => return Err(CliError::Input("--critical-value must be nonnegative".into())),
            None => {
                let cv = default_critical_value(args.level).ok_or_else(|| {
                    CliError::Input(format!(
                        "no packaged critical value for level {}; pass --critical-value",
                        args.level
                    ))
                })?;
                (cv.value, cv.provenance)
            }
        };
        manifest.critical_value = Some(value);
        manifest.critical_value_provenance = Some(provenance);
        Some(value)
    } else {
        None
    };
    if smooth && methods.iter().any(|m| *m != CiMethod::LikelihoodRatio) {
        return Err(CliError::Input(
            "normal and bootstrap intervals are available for the discrete and grouped models only".into(),
        ));
    }

    let points: Vec<f64> = match &args.points {
        Some(p) => p.clone(),
        None => (0..tally.len()).filter(|&i| tally.total(i) > 0).map(|i| tally.support()[i]).collect(),
    };
    let causes = tally.causes();
    let mut slots: Vec<Slot> = Vec::new();
    for &s in &points {
        for k in 1..=causes {
            for &m in &methods {
                if m == CiMethod::LikelihoodRatio {
                    slots.push((s, k, m, EstimatorKind::Naive));
                } else {
                    for &e in &kinds {
                        slots.push((s, k, m, e));
                    }
                }
            }
        }
    }

    let mut results: Vec<Option<Result<ConfidenceInterval, String>>> = vec![None; slots.len()];
    for &kind in &kinds {
        if methods.contains(&CiMethod::Normal) {
            let estimate = estimate_for(tally, kind, &settings)?;
            for (j, &(s, k, m, e)) in slots.iter().enumerate() {
                if m == CiMethod::Normal && e == kind {
                    results[j] = Some(ci_normal(tally, &estimate, s, k, args.level, args.clip).map_err(|e| e.to_string()));
                }
            }
        }
        if resampling {
            let mut chosen = Vec::new();
            for (j, &(s, _, m, e)) in slots.iter().enumerate() {
                if m == CiMethod::Bootstrap && e == kind {
                    if tally.index_of(s).is_some() {
                        chosen.push(j);
                    } else {
                        results[j] = Some(Err(Error::PointNotInSupport(s).to_string()));
                    }
                }
            }
            if !chosen.is_empty() {
                let targets: Vec<(f64, usize)> = chosen.iter().map(|&j| (slots[j].0, slots[j].1)).collect();
                let cis = bootstrap_intervals(tally, kind, &targets, args.level, args.resamples, args.seed, &settings)
                    .map_err(|e| match e {
                        Error::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
                        other => CliError::Input(other.to_string()),
                    })?;
                for (&j, mut ci) in chosen.iter().zip(cis) {
                    if args.clip {
                        ci.lower = ci.lower.max(0.0);
                        ci.upper = ci.upper.min(1.0);
                        ci.meta.clipped = true;
                    }
                    results[j] = Some(Ok(ci));
                }
            }
        }
    }
    if let Some(c) = critical_value {
        for (j, &(s, k, m, _)) in slots.iter().enumerate() {
            if m == CiMethod::LikelihoodRatio {
                results[j] = Some(ci_likelihood_ratio(tally, k, s, args.level, c).map_err(|e| e.to_string()));
            }
        }
    }

    let mut csv = Csv::new(&manifest, &["point", "cause", "method", "estimator", "level", "lower", "upper"]);
    let mut intervals = Vec::new();
    let mut row_errors = Vec::new();
    for (&(s, k, m, e), result) in slots.iter().zip(results) {
        let result = result.expect("every slot is evaluated");
        let (estimate, lower, upper) = match &result {
            Ok(ci) => (Some(round12(ci.estimate)), Some(round12(ci.lower)), Some(round12(ci.upper))),
            Err(message) => {
                row_errors.push(RowError { point: s, cause: k, method: m, estimator: e, message: message.clone() });
                (None, None, None)
            }
        };
        let cell = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), num);
        csv.row(&[num(s), k.to_string(), m.to_string(), e.to_string(), num(args.level), cell(lower), cell(upper)]);
        intervals.push(IntervalRow { point: round12(s), cause: k, method: m, estimator: e, level: args.level, estimate, lower, upper });
    }
    for err in &row_errors {
        eprintln!("warning: {} interval at {} for cause {}: {}", err.method, err.point, err.cause, err.message);
    }
    csv.write(&args.out.join("intervals.csv"))?;
    write_json(&args.out.join("intervals.json"), &Report { manifest: &manifest, intervals, row_errors })
}
