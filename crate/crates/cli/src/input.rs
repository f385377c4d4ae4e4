//! Reading observations and schemes into a tally, with line-numbered errors.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use csrisk_core::data::{Model, Observation, TallyTable};
use csrisk_core::error::Error;
use csrisk_core::estimators::SolverSettings;
use csrisk_core::io::{read_numbered_observations, read_scheme};

use crate::output::RunManifest;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Smooth,
    Discrete,
    Grouped,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Observation CSV with header `time,status`.
    #[arg(long)]
    pub input: PathBuf,
    /// Observation model; never inferred from the data.
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Grouping scheme file (required for the grouped model).
    #[arg(long)]
    pub scheme: Option<PathBuf>,
    /// Number of causes; defaults to the largest status in the data.
    #[arg(long)]
    pub causes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Iteration cap of the maximum likelihood solver.
    #[arg(long, default_value_t = SolverSettings::default().max_outer_iterations)]
    pub max_iterations: usize,
    /// Optimality tolerance of the maximum likelihood solver.
    #[arg(long, default_value_t = SolverSettings::default().kkt_tolerance)]
    pub kkt_tolerance: f64,
}

impl SolverArgs {
    pub fn settings(&self) -> Result<SolverSettings, CliError> {
        let s = SolverSettings {
            max_outer_iterations: self.max_iterations,
            kkt_tolerance: self.kkt_tolerance,
            ..SolverSettings::default()
        };
        s.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(s)
    }
}

pub struct Loaded {
    pub model: Model,
    pub tally: TallyTable,
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

impl DataArgs {
    pub fn load(&self, manifest: &mut RunManifest) -> Result<Loaded, CliError> {
        manifest.input("observations", &self.input);
        let numbered = read_numbered_observations(open(&self.input)?).map_err(|e| located(&self.input, e))?;
        let causes = match self.causes {
            Some(0) => return Err(CliError::Input("--causes must be at least 1".into())),
            Some(k) => k,
            None => numbered.iter().map(|(_, o)| o.status).max().unwrap_or(0).max(1),
        };
        for (line, o) in &numbered {
            if o.status > causes {
                return Err(CliError::Input(format!(
                    "{}: line {line}: status {} exceeds the number of causes {causes}",
                    self.input.display(),
                    o.status
                )));
            }
        }
        let model = match (self.model, &self.scheme) {
            (ModelArg::Grouped, None) => return Err(CliError::Input("the grouped model needs --scheme".into())),
            (ModelArg::Grouped, Some(path)) => {
                manifest.input("scheme", path);
                let scheme = read_scheme(open(path)?).map_err(|e| located(path, e))?;
                for (line, o) in &numbered {
                    if scheme.locate(o.time).is_none() && !scheme.representatives().contains(&o.time) {
                        return Err(CliError::Input(format!(
                            "{}: line {line}: time {} not covered by grouping scheme",
                            self.input.display(),
                            o.time
                        )));
                    }
                }
                Model::Grouped(scheme)
            }
            (_, Some(_)) => return Err(CliError::Input("--scheme is only used with --model grouped".into())),
            (ModelArg::Smooth, None) => Model::Smooth,
            (ModelArg::Discrete, None) => Model::Discrete,
        };
        let observations: Vec<Observation> = numbered.into_iter().map(|(_, o)| o).collect();
        let tally = model.tally(&observations, causes).map_err(|e| located(&self.input, e))?;
        manifest.model = Some(model.name().to_string());
        manifest.causes = Some(causes);
        if model == Model::Smooth {
            let tied = (0..tally.len()).filter(|&i| tally.total(i) > 1).count();
            if tied > 0 {
                manifest.warn(format!("{tied} tied observation times in a smooth-model run"));
            }
        }
        Ok(Loaded { model, tally })
    }
}
