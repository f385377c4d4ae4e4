use rand::distr::Open01;
use rand::Rng;

use super::{ObservationLaw, SimulationConfig};
use crate::data::{Model, Observation};
use crate::error::Result;
use crate::rng::stream_rng;

/// Dataset `replication` of the experiment: `n` independent subjects with
/// cause `Y`, event time `X` given `Y`, and independent inspection time `C`.
/// The status is the cause if `X <= C` and 0 otherwise; in the grouped model
/// the recorded time is the representative of the cell containing `C`.
///
/// Per subject the draws are, in order: cause, event time (only if a cause
/// occurs), inspection time.
pub fn generate_dataset(config: &SimulationConfig, replication: usize) -> Result<Vec<Observation>> {
    config.validate()?;
    let model = config.observation.model()?;
    let mut rng = stream_rng(config.seed, replication as u64);
    let mut out = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut cause = 0;
        for (k, p) in config.cause_probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                cause = k + 1;
                break;
            }
        }
        let x = if cause > 0 { config.event_laws[cause - 1].sample(&mut rng) } else { f64::INFINITY };
        let c = match &config.observation {
            ObservationLaw::Grid { points } => points[rng.random_range(0..points.len())],
            ObservationLaw::Uniform { lower, upper } | ObservationLaw::Grouped { lower, upper, .. } => {
                let v: f64 = rng.sample(Open01);
                lower + v * (upper - lower)
            }
        };
        let status = if x <= c { cause } else { 0 };
        let time = match &model {
            Model::Grouped(scheme) => scheme.round(c)?,
            _ => c,
        };
        out.push(Observation::new(time, status));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::tally_discrete;
    use crate::simulation::EventLaw;

    #[test]
    fn forced_event() {
        let config = SimulationConfig {
            cause_probabilities: vec![1.0],
            event_laws: vec![EventLaw::PointMass { at: 0.0 }],
            observation: ObservationLaw::Grid { points: vec![10.0] },
            n: 20,
            replications: 1,
            seed: 3,
            evaluation_points: vec![10.0],
        };
        let data = generate_dataset(&config, 0).unwrap();
        assert!(data.iter().all(|o| *o == Observation::new(10.0, 1)));
    }

    #[test]
    fn reproducible() {
        let config = SimulationConfig::two_gamma_causes(SimulationConfig::grid_with_gap(2.0), 500, 1, 11);
        assert_eq!(generate_dataset(&config, 4).unwrap(), generate_dataset(&config, 4).unwrap());
        assert_ne!(generate_dataset(&config, 4).unwrap(), generate_dataset(&config, 5).unwrap());
    }

    #[test]
    fn grid_counts_are_roughly_uniform() {
        let config = SimulationConfig::two_gamma_causes(SimulationConfig::grid_with_gap(10.0), 3000, 1, 5);
        let t = tally_discrete(&generate_dataset(&config, 0).unwrap(), 2).unwrap();
        assert_eq!(t.support(), &[10.0, 20.0, 30.0]);
        for i in 0..3 {
            // Binomial(3000, 1/3): sd about 25.8
            assert!((t.total(i) as f64 - 1000.0).abs() < 4.0 * 25.9);
        }
    }
}
