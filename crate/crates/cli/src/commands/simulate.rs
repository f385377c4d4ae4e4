use std::path::PathBuf;

use clap::Args;
use csrisk_core::error::Error;
use csrisk_core::simulation::{coverage_experiment, CoverageReport};
use serde::Serialize;

use crate::config::SimulationFile;
use crate::output::{num, write_json, Csv, RunManifest};
use crate::CliError;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config (TOML); several `[[grids]]` form a sweep.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the number of replications.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Also write `plot_data.csv`: coverage and width against t0 per grid.
    #[arg(long)]
    pub emit_plot_data: bool,
    /// Output directory for `coverage.csv` and `coverage.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Report<'a> {
    manifest: &'a RunManifest,
    sections: Vec<CoverageReport>,
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("simulate");
    manifest.input("config", &args.config);
    let mut file = SimulationFile::read(&args.config)?;
    if let Some(r) = args.replications {
        file.replications = r;
    }
    if file.replications == 0 {
        return Err(CliError::Input("replications must be positive".into()));
    }
    let settings = file.inference.settings();
    manifest.methods = settings.methods.iter().map(|m| m.to_string()).collect();
    manifest.estimators = settings.estimators.iter().map(|k| k.to_string()).collect();
    manifest.level = Some(settings.level);
    manifest.resamples = Some(settings.resamples);
    manifest.seed = Some(file.seed);
    manifest.causes = Some(file.cause_probabilities.len());
    manifest.settings = Some(serde_json::to_value(&file).expect("config serializes"));

    // Validate every grid before running any of them.
    let configs = (0..file.grids.len()).map(|i| file.config(i)).collect::<Result<Vec<_>, _>>()?;
    let mut sections = Vec::new();
    for (spec, config) in file.grids.iter().zip(&configs) {
        eprintln!("simulating {} ({} replications)", spec.label(), config.replications);
        let mut report = coverage_experiment(config, &settings).map_err(|e| match e {
            Error::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            other => CliError::Input(other.to_string()),
        })?;
        report.label = spec.label();
        sections.push(report);
    }
    if let Some(c) = sections.iter().find_map(|s| s.critical_value) {
        manifest.critical_value = Some(c);
    }

    let header = [
        "grid", "model", "points_per_grid", "n", "point", "cause", "method", "estimator", "true_value", "coverage",
        "mean_width", "mc_se", "replications", "undefined", "mean_estimate", "mean_plugin_variance",
    ];
    let mut csv = Csv::new(&manifest, &header);
    let mut plot = Csv::new(&manifest, &["grid", "method", "estimator", "cause", "t0", "coverage", "width"]);
    for section in &sections {
        for r in &section.rows {
            csv.row(&[
                section.label.clone(),
                section.model.clone(),
                section.points_per_grid.map_or_else(|| "NA".into(), |p| p.to_string()),
                section.n.to_string(),
                num(r.point),
                r.cause.to_string(),
                r.method.to_string(),
                r.estimator.to_string(),
                num(r.true_value),
                num(r.coverage),
                num(r.mean_width),
                num(r.mc_se),
                r.replications.to_string(),
                r.undefined.to_string(),
                num(r.mean_estimate),
                r.mean_plugin_variance.map_or_else(|| "NA".into(), num),
            ]);
        }
        let mut rows: Vec<_> = section.rows.iter().collect();
        rows.sort_by(|a, b| {
            (a.method.as_str(), a.estimator.as_str(), a.cause)
                .cmp(&(b.method.as_str(), b.estimator.as_str(), b.cause))
                .then(a.point.total_cmp(&b.point))
        });
        for r in rows {
            plot.row(&[
                section.label.clone(),
                r.method.to_string(),
                r.estimator.to_string(),
                r.cause.to_string(),
                num(r.point),
                num(r.coverage),
                num(r.mean_width),
            ]);
        }
    }
    csv.write(&args.out.join("coverage.csv"))?;
    if args.emit_plot_data {
        plot.write(&args.out.join("plot_data.csv"))?;
    }
    for section in &mut sections {
        round_report(section);
    }
    write_json(&args.out.join("coverage.json"), &Report { manifest: &manifest, sections })
}

fn round_report(report: &mut CoverageReport) {
    use crate::output::round12;
    for r in &mut report.rows {
        r.true_value = round12(r.true_value);
        r.coverage = round12(r.coverage);
        r.mean_width = round12(r.mean_width);
        r.mc_se = round12(r.mc_se);
        r.mean_estimate = round12(r.mean_estimate);
        r.mean_plugin_variance = r.mean_plugin_variance.map(round12);
    }
}
