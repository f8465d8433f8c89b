use std::f64::consts::PI;

use gaussmet_core::estimator::run_experiment;
use gaussmet_core::figures::{figure, FigureGrid, FigureName};
use gaussmet_core::fisher::{available_types, gaussian_fi, optimize_gaussian_fi, qfi};
use gaussmet_core::fock::sld_diagnostics;
use gaussmet_core::state::{apply_phase_shift, apply_thermal_channel, params_to_moments};
use gaussmet_core::{ChannelParams, CutoffPolicy, ExperimentConfig, MeasurementSpec, StateParams};
use proptest::prelude::*;

fn arb_state() -> impl Strategy<Value = StateParams> {
    (0.0..1.5f64, -PI..PI, 0.0..1.0f64, -PI..PI, 0.0..2.0f64)
        .prop_map(|(a, tc, r, ts, n)| StateParams::new(a, tc, r, ts, n).unwrap())
}

fn arb_spec() -> impl Strategy<Value = MeasurementSpec> {
    prop_oneof![
        (-PI..PI).prop_map(|psi| MeasurementSpec::homodyne(psi).unwrap()),
        (0.0..2.0f64, -PI..PI).prop_map(|(s, psi)| MeasurementSpec::general_dyne(s, psi).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fi_is_invariant_under_joint_rotation(p in arb_state(), spec in arb_spec(), phi in -1.0..1.0f64, t in -PI..PI) {
        // rotating state and measurement together leaves the statistics unchanged
        let rotated_state = apply_phase_shift(&p, t);
        let rotated_spec = if spec.is_homodyne() {
            MeasurementSpec::homodyne(spec.psi() - 2.0 * t).unwrap()
        } else {
            MeasurementSpec::general_dyne(spec.s(), spec.psi() - 2.0 * t).unwrap()
        };
        let a = gaussian_fi(&p, phi, &spec).unwrap();
        let b = gaussian_fi(&rotated_state, phi, &rotated_spec).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn qfi_does_not_depend_on_phase(p in arb_state(), phi in -PI..PI) {
        let h = qfi(&p);
        prop_assert!((qfi(&apply_phase_shift(&p, phi)) - h).abs() <= 1e-10 * h.max(1.0));
    }

    #[test]
    fn loss_never_adds_information(p in arb_state(), eta in 0.0..1.0f64, n_e in 0.0..3.0f64) {
        let out = apply_thermal_channel(&p, &ChannelParams::new(eta, n_e).unwrap());
        prop_assert!(params_to_moments(&out).is_physical());
        prop_assert!(optimize_gaussian_fi(&out, 0.1).fi <= optimize_gaussian_fi(&p, 0.1).fi * (1.0 + 1e-6) + 1e-12);
    }

    #[test]
    fn optimizer_reaches_closed_forms(a in 0.0..2.0f64, r in 0.0..1.2f64, ts in -PI..PI, n in 0.0..2.0f64, phi in -PI..PI) {
        let p = StateParams::canonical(a, r, ts, n).unwrap();
        let rep = optimize_gaussian_fi(&p, phi);
        let best = available_types(&p).into_iter().map(|(_, f)| f).fold(0.0, f64::max);
        prop_assert!(rep.fi >= best * (1.0 - 1e-6));
        prop_assert!(rep.fi <= rep.qfi * (1.0 + 1e-9));
    }
}

#[test]
fn sld_oracle_on_a_heavy_point() {
    let p = StateParams::canonical(1.5, 1.2, 0.0, 2.0).unwrap();
    let d = sld_diagnostics(&p, 0.3, &CutoffPolicy::new(1e-14, 6000).unwrap()).unwrap();
    assert!((d.qfi_closed / qfi(&p) - 1.0).abs() < 1e-8);
    assert!(d.residual_closed < 1e-8 && d.residual_spectral < 1e-8);
}

#[test]
fn default_policy_rejects_heavy_points() {
    let p = StateParams::canonical(1.5, 1.2, 0.0, 2.0).unwrap();
    assert!(sld_diagnostics(&p, 0.3, &CutoffPolicy::default()).is_err());
}

#[test]
fn trajectories_lose_information() {
    for name in [FigureName::Fig3a, FigureName::Fig5a] {
        let t = figure(name, &FigureGrid::default_for(name)).unwrap();
        for series in 1..=4 {
            let fi: Vec<f64> = t.rows.iter().filter(|r| r[0] == series as f64).map(|r| r[5]).collect();
            assert!(fi.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{name:?} {series}: {fi:?}");
        }
    }
}

#[test]
fn experiments_are_reproducible() {
    let p = StateParams::canonical(1.0, 0.2, 0.0, 0.1).unwrap();
    let spec = optimize_gaussian_fi(&p, 0.0).spec;
    let config = ExperimentConfig::new(p, spec, 0.0, 200, 40, 11);
    assert_eq!(run_experiment(&config).unwrap(), run_experiment(&config).unwrap());
    let other = ExperimentConfig { seed: 12, ..config };
    assert_ne!(run_experiment(&config).unwrap().estimates, run_experiment(&other).unwrap().estimates);
}
