//! Fixtures shared by the benchmarks.

use csrisk_core::data::TallyTable;
use csrisk_core::simulation::{generate_dataset, ObservationLaw, SimulationConfig};

/// Tally of one simulated two-cause dataset of size `n` observed on `law`.
pub fn fixture(law: ObservationLaw, n: usize, seed: u64) -> TallyTable {
    let config = SimulationConfig::two_gamma_causes(law, n, 1, seed);
    let data = generate_dataset(&config, 0).expect("valid fixture config");
    config.observation.model().expect("valid law").tally(&data, 2).expect("valid fixture data")
}

/// Discrete fixture on the grid with spacing `gap` over `(5, 35]`.
pub fn grid_fixture(gap: f64, n: usize) -> TallyTable {
    fixture(SimulationConfig::grid_with_gap(gap), n, 11)
}
