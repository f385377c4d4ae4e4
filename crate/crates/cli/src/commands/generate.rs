use std::path::PathBuf;

use clap::Args;
use csrisk_core::io::write_observations;
use csrisk_core::simulation::generate_dataset;

use crate::config::SimulationFile;
use crate::output::{write_file, RunManifest};
use crate::CliError;

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Simulation config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Which `[[grids]]` entry to draw from (0-based).
    #[arg(long, default_value_t = 0)]
    pub grid: usize,
    /// Replication index; the same index always yields the same dataset.
    #[arg(long, default_value_t = 0)]
    pub replication: usize,
    /// Output CSV file (`time,status`).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &GenerateArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("generate");
    manifest.input("config", &args.config);
    let file = SimulationFile::read(&args.config)?;
    if args.grid >= file.grids.len() {
        return Err(CliError::Input(format!("grid {} out of range ({} given)", args.grid, file.grids.len())));
    }
    let config = file.config(args.grid)?;
    manifest.seed = Some(config.seed);
    manifest.causes = Some(config.causes());
    manifest.model = Some(config.observation.model().map_err(|e| CliError::Input(e.to_string()))?.name().to_string());
    manifest.settings = Some(serde_json::json!({
        "grid": file.grids[args.grid].label(),
        "replication": args.replication,
        "n": config.n,
    }));
    let data = generate_dataset(&config, args.replication).map_err(|e| CliError::Input(e.to_string()))?;
    let json = serde_json::to_string(&manifest).expect("manifest serializes");
    write_file(&args.out, &format!("# manifest: {json}\n{}", write_observations(&data)))
}
