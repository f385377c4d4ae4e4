//! TOML description of a simulation sweep: one data-generating model shared
//! by one or more observation laws ("grids").

use std::path::Path;

use csrisk_core::data::Closure;
use csrisk_core::estimators::EstimatorKind;
use csrisk_core::inference::CiMethod;
use csrisk_core::simulation::{equispaced_grid, CoverageSettings, EventLaw, ObservationLaw, SimulationConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    #[serde(default)]
    pub label: Option<String>,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub cause_probabilities: Vec<f64>,
    pub event_laws: Vec<EventLaw>,
    #[serde(default = "default_points")]
    pub evaluation_points: Vec<f64>,
    #[serde(default)]
    pub inference: InferenceSection,
    pub grids: Vec<GridSpec>,
}

fn default_points() -> Vec<f64> {
    vec![10.0, 20.0, 30.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferenceSection {
    pub methods: Vec<CiMethod>,
    pub estimators: Vec<EstimatorKind>,
    pub level: f64,
    pub resamples: usize,
    pub critical_value: Option<f64>,
    pub clip: bool,
}

impl Default for InferenceSection {
    fn default() -> Self {
        let d = CoverageSettings::default();
        Self {
            methods: d.methods,
            estimators: d.estimators,
            level: d.level,
            resamples: d.resamples,
            critical_value: d.critical_value,
            clip: d.clip,
        }
    }
}

impl InferenceSection {
    pub fn settings(&self) -> CoverageSettings {
        CoverageSettings {
            methods: self.methods.clone(),
            estimators: self.estimators.clone(),
            level: self.level,
            resamples: self.resamples,
            critical_value: self.critical_value,
            clip: self.clip,
            ..CoverageSettings::default()
        }
    }
}

/// One observation law. Grids and grouping breaks are either listed or laid
/// out with a spacing over `(lower, upper]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    Grid {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        points: Option<Vec<f64>>,
        #[serde(default)]
        gap: Option<f64>,
        #[serde(default = "default_lower")]
        lower: f64,
        #[serde(default = "default_upper")]
        upper: f64,
    },
    Uniform {
        #[serde(default)]
        label: Option<String>,
        #[serde(default = "default_lower")]
        lower: f64,
        #[serde(default = "default_upper")]
        upper: f64,
    },
    Grouped {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        breaks: Option<Vec<f64>>,
        #[serde(default)]
        gap: Option<f64>,
        #[serde(default = "default_lower")]
        lower: f64,
        #[serde(default = "default_upper")]
        upper: f64,
        #[serde(default = "default_closure")]
        closure: Closure,
    },
}

fn default_lower() -> f64 {
    5.0
}

fn default_upper() -> f64 {
    35.0
}

fn default_closure() -> Closure {
    Closure::OpenClosed
}

fn spacing(points: &Option<Vec<f64>>, gap: Option<f64>, what: &str) -> Result<(), CliError> {
    match (points, gap) {
        (Some(_), None) | (None, Some(_)) => Ok(()),
        _ => Err(CliError::Input(format!("{what}: give exactly one of the explicit list or `gap`"))),
    }
}

impl GridSpec {
    pub fn label(&self) -> String {
        match self {
            GridSpec::Grid { label: Some(l), .. }
            | GridSpec::Uniform { label: Some(l), .. }
            | GridSpec::Grouped { label: Some(l), .. } => l.clone(),
            GridSpec::Grid { gap: Some(g), .. } => format!("gap {g}"),
            GridSpec::Grid { .. } => "grid".into(),
            GridSpec::Uniform { lower, upper, .. } => format!("uniform {lower}-{upper}"),
            GridSpec::Grouped { gap: Some(g), .. } => format!("grouped gap {g}"),
            GridSpec::Grouped { .. } => "grouped".into(),
        }
    }

    pub fn law(&self) -> Result<ObservationLaw, CliError> {
        let bad_range = |lower: f64, upper: f64| !(lower.is_finite() && upper.is_finite() && lower < upper);
        let bad_gap = |gap: Option<f64>| gap.is_some_and(|g| !(g > 0.0 && g.is_finite()));
        Ok(match self {
            GridSpec::Grid { points, gap, lower, upper, .. } => {
                spacing(points, *gap, "grid")?;
                if bad_gap(*gap) || bad_range(*lower, *upper) {
                    return Err(CliError::Input(format!("grid '{}': need gap > 0 and lower < upper", self.label())));
                }
                let points = match gap {
                    Some(g) => equispaced_grid(*g, *lower, *upper),
                    None => points.clone().unwrap_or_default(),
                };
                ObservationLaw::Grid { points }
            }
            GridSpec::Uniform { lower, upper, .. } => ObservationLaw::Uniform { lower: *lower, upper: *upper },
            GridSpec::Grouped { breaks, gap, lower, upper, closure, .. } => {
                spacing(breaks, *gap, "grouped")?;
                if bad_gap(*gap) || bad_range(*lower, *upper) {
                    return Err(CliError::Input(format!("grid '{}': need gap > 0 and lower < upper", self.label())));
                }
                let breaks = match gap {
                    Some(g) => {
                        let mut b = vec![*lower];
                        b.extend(equispaced_grid(*g, *lower, *upper));
                        b
                    }
                    None => breaks.clone().unwrap_or_default(),
                };
                ObservationLaw::Grouped { lower: *lower, upper: *upper, breaks, closure: *closure }
            }
        })
    }
}

impl SimulationFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let file: Self = toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if file.grids.is_empty() {
            return Err(CliError::Input(format!("{}: no [[grids]] given", path.display())));
        }
        Ok(file)
    }

    /// Core configuration for grid `index`, validated.
    pub fn config(&self, index: usize) -> Result<SimulationConfig, CliError> {
        let config = SimulationConfig {
            cause_probabilities: self.cause_probabilities.clone(),
            event_laws: self.event_laws.clone(),
            observation: self.grids[index].law()?,
            n: self.n,
            replications: self.replications,
            seed: self.seed,
            evaluation_points: self.evaluation_points.clone(),
        };
        config.validate().map_err(|e| CliError::Input(format!("grid '{}': {e}", self.grids[index].label())))?;
        Ok(config)
    }
}
