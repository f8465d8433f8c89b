//! Named self-check suites run by `gaussmet verify`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fisher::{
    closed_form_fi, dsvs_fi_type_i, dsvs_fi_type_ii, dts_fi_max, gaussian_fi, numeric_fi_oracle,
    optimal_measurement_spec, optimize_gaussian_fi, qfi, s_opt, sts_fi_type_i, sts_fi_type_ii, svs_fi,
    OptimalType,
};
use crate::fock::{sld_diagnostics, svs_homodyne_optimality_check, CutoffPolicy};
use crate::measurement::MeasurementSpec;
use crate::state::StateParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Suite {
    Fi,
    Sld,
    Reductions,
    HomodyneOptimality,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fi" => Ok(Suite::Fi),
            "sld" => Ok(Suite::Sld),
            "reductions" => Ok(Suite::Reductions),
            "appendixD" => Ok(Suite::HomodyneOptimality),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidParameter(format!("unknown suite '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Parameter point, human readable.
    pub point: String,
    /// Error measure; the check passes when `value <= tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, point: String, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), point, value, tolerance, pass: value <= tolerance }
    }

    fn failed(name: &str, point: String, err: &Error) -> Self {
        Self { name: format!("{name}: {err}"), point, value: f64::INFINITY, tolerance: 0.0, pass: false }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn state_label(p: &StateParams) -> String {
    format!(
        "alpha={} theta_c={:.6} r={} theta_s={} nth={}",
        p.alpha_mag(),
        p.theta_c(),
        p.r(),
        p.theta_s(),
        p.n_th()
    )
}

pub fn run(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Fi => fi_suite(),
        Suite::Sld => sld_suite(),
        Suite::Reductions => reductions_suite(),
        Suite::HomodyneOptimality => homodyne_optimality_suite(),
        Suite::All => [fi_suite(), sld_suite(), reductions_suite(), homodyne_optimality_suite()].concat(),
    }
}

fn fi_suite() -> Vec<Check> {
    let mut out = Vec::new();
    let points = [
        (StateParams::new(1.0, 0.3, 0.0, 0.0, 0.0), MeasurementSpec::homodyne(0.7)),
        (StateParams::new(0.5, 1.1, 0.6, 0.4, 0.3), Ok(MeasurementSpec::heterodyne())),
        (StateParams::new(0.8, -0.4, 0.3, 1.2, 1.0), MeasurementSpec::general_dyne(0.5, 0.9)),
        (StateParams::new(0.0, 0.0, 0.8, 0.0, 0.4), MeasurementSpec::general_dyne(0.8, 0.0)),
    ];
    for (p, spec) in points {
        let (p, spec) = (p.expect("valid state"), spec.expect("valid spec"));
        let point = format!("{} spec=({}, {})", state_label(&p), spec.s(), spec.psi());
        match (gaussian_fi(&p, 0.2, &spec), numeric_fi_oracle(&p, 0.2, &spec)) {
            (Ok(a), Ok(b)) => out.push(Check::new("gaussian_fi vs quadrature", point, rel(a, b), 1e-5)),
            (Err(e), _) | (_, Err(e)) => out.push(Check::failed("gaussian_fi vs quadrature", point, &e)),
        }
    }
    for (a, n) in [(0.3, 0.0), (1.0, 0.5), (2.0, 3.0)] {
        let p = StateParams::displaced_thermal(a, 0.0, n).expect("valid state");
        let rep = optimize_gaussian_fi(&p, 0.1);
        out.push(Check::new("displaced thermal optimum = QFI", state_label(&p), rel(rep.fi, qfi(&p)), 1e-9));
    }
    for r in [0.3, 0.8, 1.2] {
        let p = StateParams::squeezed_thermal(r, 0.0, 0.0).expect("valid state");
        let rep = optimize_gaussian_fi(&p, 0.1);
        out.push(Check::new("squeezed vacuum optimum = QFI", state_label(&p), rel(rep.fi, svs_fi(r)), 1e-12));
    }
    for (a, r, n) in [(0.5, 0.4, 0.3), (1.0, 0.8, 1.0), (0.2, 1.2, 2.0)] {
        let p = StateParams::canonical(a, r, 0.3, n).expect("valid state");
        let rep = optimize_gaussian_fi(&p, 0.0);
        out.push(Check::new("optimum <= QFI", state_label(&p), (rep.fi / rep.qfi - 1.0).max(0.0), 1e-9));
    }
    out
}

fn sld_suite() -> Vec<Check> {
    let policy = CutoffPolicy::new(1e-14, 6000).expect("valid policy");
    let mut out = Vec::new();
    for (a, r, n) in [(0.5, 0.0, 0.3), (0.0, 0.4, 1.0), (1.0, 0.4, 0.3), (0.5, 0.8, 2.0), (1.5, 0.8, 0.0)] {
        let p = StateParams::canonical(a, r, 0.0, n).expect("valid state");
        let point = state_label(&p);
        let d = match sld_diagnostics(&p, 0.3, &policy) {
            Ok(d) => d,
            Err(e) => {
                out.push(Check::failed("sld diagnostics", point, &e));
                continue;
            }
        };
        out.push(Check::new("Tr[rho L^2] vs QFI", point.clone(), rel(d.qfi_closed, qfi(&p)), 1e-6));
        out.push(Check::new("closed-form SLD residual", point.clone(), d.residual_closed, 1e-8));
        if n > 0.0 {
            out.push(Check::new("spectral SLD residual", point.clone(), d.residual_spectral, 1e-8));
        }
        if let Some(diff) = d.spectral_vs_closed {
            out.push(Check::new("spectral vs closed-form SLD", point, diff, 1e-6));
        }
    }
    out
}

fn reductions_suite() -> Vec<Check> {
    let mut out = Vec::new();
    for r in [0.3, 0.8] {
        for n in [0.2, 1.0] {
            let dts = StateParams::canonical(0.9, 0.0, 0.0, n).expect("valid state");
            let sts = StateParams::canonical(0.0, r, 0.0, n).expect("valid state");
            let pure = StateParams::canonical(0.7, r, 0.0, 0.0).expect("valid state");
            let mut push = |name: &str, p: &StateParams, t: OptimalType, expected: f64| {
                let point = state_label(p);
                match closed_form_fi(p, t) {
                    Ok(v) => out.push(Check::new(name, point, rel(v, expected), 1e-12)),
                    Err(e) => out.push(Check::failed(name, point, &e)),
                }
            };
            push("Type-I at r=0", &dts, OptimalType::TypeI, dts_fi_max(0.9, n));
            push("Type-II at alpha=0", &sts, OptimalType::TypeII, sts_fi_type_i(r, n));
            push("Type-III at alpha=0", &sts, OptimalType::TypeIII, sts_fi_type_ii(r, n));
            push("Type-I at nth=0", &pure, OptimalType::TypeI, dsvs_fi_type_i(0.7, r));
            push("Type-II at nth=0", &pure, OptimalType::TypeII, dsvs_fi_type_ii(0.7, r));
            match s_opt(&sts) {
                Ok(s) => out.push(Check::new("s_opt at alpha=0", state_label(&sts), (s - r).abs(), 1e-12)),
                Err(e) => out.push(Check::failed("s_opt at alpha=0", state_label(&sts), &e)),
            }
            let spec = optimal_measurement_spec(&sts, 0.4, OptimalType::TypeIII);
            match spec.and_then(|s| gaussian_fi(&sts, 0.4, &s)) {
                Ok(f) => out.push(Check::new("Type-III spec realizes its FI", state_label(&sts), rel(f, sts_fi_type_ii(r, n)), 1e-9)),
                Err(e) => out.push(Check::failed("Type-III spec realizes its FI", state_label(&sts), &e)),
            }
        }
    }
    out
}

fn homodyne_optimality_suite() -> Vec<Check> {
    let xs: Vec<f64> = (0..81).map(|i| -4.0 + 0.1 * i as f64).collect();
    let mut out = Vec::new();
    for r in [0.3, 0.8] {
        let point = format!("r={r}");
        match svs_homodyne_optimality_check(r, 0.25, &xs) {
            Ok(rep) => {
                out.push(Check::new("max |Im Tr(rho Pi_x L)|", point.clone(), rep.max_imag, 1e-10));
                out.push(Check::new("Re Tr(rho Pi_x L) vs closed form", point, rep.max_real_error, 1e-8));
            }
            Err(e) => out.push(Check::failed("homodyne optimality", point, &e)),
        }
    }
    out
}
