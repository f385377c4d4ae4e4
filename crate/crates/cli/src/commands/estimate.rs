use std::path::PathBuf;

use clap::Args;
use csrisk_core::error::Error;
use csrisk_core::estimators::{log_likelihood, mle, naive_estimate, simple_estimator, EstimatorKind, StepEstimate};
use serde::Serialize;

use super::{dedup, EstimatorArg};
use crate::input::{DataArgs, SolverArgs};
use crate::output::{num, opt_round, round12, write_json, Csv, RunManifest};
use crate::CliError;

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Estimators to run (comma separated).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "mle")]
    pub estimator: Vec<EstimatorArg>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory for `estimates.csv` and `estimates.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct EstimateRow {
    point: f64,
    cause: usize,
    estimate: f64,
    kind: EstimatorKind,
}

#[derive(Serialize)]
struct Diagnostics {
    kind: EstimatorKind,
    log_likelihood: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kkt_residual: Option<f64>,
    converged: bool,
}

#[derive(Serialize)]
struct Report<'a> {
    manifest: &'a RunManifest,
    observations: u64,
    support_points: usize,
    estimates: Vec<EstimateRow>,
    diagnostics: Vec<Diagnostics>,
}

pub fn run(args: &EstimateArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("estimate");
    let settings = args.solver.settings()?;
    let kinds: Vec<EstimatorKind> = dedup(&args.estimator).into_iter().map(Into::into).collect();
    manifest.estimators = kinds.iter().map(|k| k.to_string()).collect();
    manifest.settings = Some(serde_json::to_value(settings).expect("settings serialize"));
    let loaded = args.data.load(&mut manifest)?;
    let tally = &loaded.tally;

    let mut fits: Vec<(StepEstimate, Diagnostics)> = Vec::new();
    let mut failure = None;
    for &kind in &kinds {
        let (estimate, diagnostics) = match kind {
            EstimatorKind::Mle => match mle(tally, &settings) {
                Ok(fit) => {
                    let d = Diagnostics {
                        kind,
                        log_likelihood: opt_round(Some(fit.log_likelihood)),
                        iterations: Some(fit.iterations),
                        kkt_residual: opt_round(Some(fit.kkt_residual)),
                        converged: true,
                    };
                    (fit.estimate, d)
                }
                Err(Error::NonConvergence { iterations, log_likelihood, kkt_residual, last }) => {
                    failure = Some(format!(
                        "maximum likelihood solver stopped after {iterations} iterations with KKT residual {kkt_residual:e}"
                    ));
                    let d = Diagnostics {
                        kind,
                        log_likelihood: opt_round(Some(log_likelihood)),
                        iterations: Some(iterations),
                        kkt_residual: opt_round(Some(kkt_residual)),
                        converged: false,
                    };
                    (*last, d)
                }
                Err(e) => return Err(CliError::Input(e.to_string())),
            },
            EstimatorKind::Naive | EstimatorKind::Simple => {
                let e = if kind == EstimatorKind::Naive { naive_estimate(tally) } else { simple_estimator(tally) };
                let ll = log_likelihood(tally, &e.values);
                let d = Diagnostics { kind, log_likelihood: opt_round(Some(ll)), iterations: None, kkt_residual: None, converged: true };
                (e, d)
            }
        };
        fits.push((estimate, diagnostics));
    }

    let model = loaded.model.name();
    let mut csv = Csv::new(&manifest, &["point", "cause", "estimate", "kind", "model"]);
    let mut rows = Vec::new();
    for (estimate, _) in &fits {
        for (i, &s) in tally.support().iter().enumerate() {
            if tally.total(i) == 0 {
                continue;
            }
            for k in 1..=tally.causes() {
                let v = estimate.value(i, k);
                csv.row(&[num(s), k.to_string(), num(v), estimate.kind.to_string(), model.to_string()]);
                rows.push(EstimateRow { point: round12(s), cause: k, estimate: round12(v), kind: estimate.kind });
            }
        }
    }
    csv.write(&args.out.join("estimates.csv"))?;
    let report = Report {
        manifest: &manifest,
        observations: tally.n(),
        support_points: tally.len(),
        estimates: rows,
        diagnostics: fits.into_iter().map(|(_, d)| d).collect(),
    };
    write_json(&args.out.join("estimates.json"), &report)?;
    match failure {
        Some(message) => Err(CliError::NonConvergence(message)),
        None => Ok(()),
    }
}
