use std::path::PathBuf;

use clap::Args;
use csrisk_core::simulation::{rate_experiment, EventLaw, RateConfig, RateRow};
use serde::Serialize;

use crate::output::{num, round12, write_json, Csv, RunManifest};
use crate::CliError;

#[derive(Debug, Args)]
pub struct RateArgs {
    /// Grid spacing exponent: spacing `n^-gamma` on the rescaled range.
    #[arg(long)]
    pub gamma: f64,
    /// Sample sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Target on the rescaled range `(0, 1)`.
    #[arg(long, default_value_t = 0.5)]
    pub t0: f64,
    #[arg(long, default_value_t = 500)]
    pub replications: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Event probability.
    #[arg(long, default_value_t = 1.0)]
    pub probability: f64,
    /// Gamma shape of the event time.
    #[arg(long, default_value_t = 5.0)]
    pub shape: f64,
    /// Gamma scale of the event time.
    #[arg(long, default_value_t = 3.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 5.0)]
    pub lower: f64,
    #[arg(long, default_value_t = 35.0)]
    pub upper: f64,
    /// Output directory for `rate.csv` and `rate.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Report<'a> {
    manifest: &'a RunManifest,
    rows: Vec<RateRow>,
}

pub fn run(args: &RateArgs) -> Result<(), CliError> {
    let base = RateConfig {
        probability: args.probability,
        law: EventLaw::Gamma { shape: args.shape, scale: args.scale },
        lower: args.lower,
        upper: args.upper,
    };
    let mut manifest = RunManifest::new("rate");
    manifest.seed = Some(args.seed);
    manifest.settings = Some(serde_json::json!({
        "gamma": args.gamma,
        "n": args.n,
        "t0": args.t0,
        "replications": args.replications,
        "base": base,
    }));
    let mut rows = rate_experiment(args.gamma, &args.n, &base, args.t0, args.replications, args.seed)
        .map_err(|e| CliError::Input(e.to_string()))?;

    let header = [
        "n", "spacing", "grid_points", "point", "time", "true_value", "target_variance", "mean_deviation",
        "sd_deviation", "scaled_variance_sparse", "scaled_sd_cube_root",
    ];
    let mut csv = Csv::new(&manifest, &header);
    for r in &mut rows {
        for x in [
            &mut r.spacing,
            &mut r.point,
            &mut r.time,
            &mut r.true_value,
            &mut r.target_variance,
            &mut r.mean_deviation,
            &mut r.sd_deviation,
            &mut r.scaled_variance_sparse,
            &mut r.scaled_sd_cube_root,
        ] {
            *x = round12(*x);
        }
        csv.row(&[
            r.n.to_string(),
            num(r.spacing),
            r.grid_points.to_string(),
            num(r.point),
            num(r.time),
            num(r.true_value),
            num(r.target_variance),
            num(r.mean_deviation),
            num(r.sd_deviation),
            num(r.scaled_variance_sparse),
            num(r.scaled_sd_cube_root),
        ]);
    }
    csv.write(&args.out.join("rate.csv"))?;
    write_json(&args.out.join("rate.json"), &Report { manifest: &manifest, rows })
}
