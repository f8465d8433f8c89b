//! Shared inputs for the criterion benchmarks.

use gaussmet_core::{MeasurementSpec, StateParams};

/// Displaced squeezed thermal states spanning light to heavy Fock supports.
pub fn sample_states() -> Vec<(&'static str, StateParams)> {
    vec![
        ("coherent", StateParams::canonical(1.0, 0.0, 0.0, 0.0).expect("valid")),
        ("dsts_light", StateParams::canonical(0.5, 0.4, 0.3, 0.3).expect("valid")),
        ("dsts_heavy", StateParams::canonical(1.5, 1.2, 0.0, 2.0).expect("valid")),
    ]
}

pub fn sample_specs() -> Vec<(&'static str, MeasurementSpec)> {
    vec![
        ("homodyne", MeasurementSpec::homodyne(0.7).expect("valid")),
        ("heterodyne", MeasurementSpec::heterodyne()),
        ("general", MeasurementSpec::general_dyne(0.5, 0.9).expect("valid")),
    ]
}
