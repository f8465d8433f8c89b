//! Classical and quantum Fisher information for phase estimation.

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{MeasurementKind, MeasurementSpec};
use crate::quadrature::{integrate, integrate_2d};
use crate::state::{phase_shifted_moments, rotation, rotation_generator, GaussianMoments, StateParams};

mod closed_form;
mod optimize;

pub use closed_form::*;
pub use optimize::{optimize_gaussian_fi, optimize_moments};

/// Condition number above which an outcome covariance is rejected.
pub const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum OptimalType {
    TypeI,
    TypeII,
    TypeIII,
}

impl std::fmt::Display for OptimalType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptimalType::TypeI => "I",
            OptimalType::TypeII => "II",
            OptimalType::TypeIII => "III",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub fi: f64,
    pub qfi: f64,
    /// `fi / qfi`, or 1 when the state carries no phase information.
    pub ratio: f64,
    pub spec: MeasurementSpec,
    pub type_used: Option<OptimalType>,
}

/// Moments and their φ-derivatives at one phase.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sensitivity {
    pub sigma: Matrix2<f64>,
    pub dsigma: Matrix2<f64>,
    pub dd: Vector2<f64>,
}

impl Sensitivity {
    pub fn new(m: &GaussianMoments) -> Self {
        let j = rotation_generator();
        Self {
            sigma: m.sigma,
            dsigma: j * m.sigma - m.sigma * j,
            dd: j * m.d,
        }
    }

    pub fn at(p: &StateParams, phi: f64) -> Self {
        Self::new(&phase_shifted_moments(p, phi))
    }

    pub fn fi(&self, spec: &MeasurementSpec) -> Result<f64> {
        match spec.kind() {
            MeasurementKind::Homodyne => {
                let (s, c) = spec.quadrature_angle().sin_cos();
                let u = Vector2::new(c, s);
                let v = u.dot(&(self.sigma * u));
                if !(v > 0.0) {
                    return Err(Error::IllConditioned(f64::INFINITY));
                }
                let dmu = u.dot(&self.dd);
                let dv = u.dot(&(self.dsigma * u));
                Ok(dmu * dmu / v + dv * dv / (2.0 * v * v))
            }
            MeasurementKind::GeneralDyne => {
                // Work in the seed's principal frame, where σ_seed is
                // diag(e^{−2s}, e^{2s})/2, and invert through the adjugate so
                // that large s does not cancel catastrophically.
                let rot = rotation(spec.quadrature_angle());
                let sig = rot * self.sigma * rot.transpose();
                let ds = rot * self.dsigma * rot.transpose();
                let dd = rot * self.dd;
                let (lo_seed, hi_seed) = (0.5 * (-2.0 * spec.s()).exp(), 0.5 * (2.0 * spec.s()).exp());
                let (s00, s11, s01) = (sig[(0, 0)] + lo_seed, sig[(1, 1)] + hi_seed, sig[(0, 1)]);
                // det(σ + σ_seed) = det σ + ¼ + (cross terms), all nonnegative
                let det = self.sigma.determinant() + 0.25 + lo_seed * sig[(1, 1)] + hi_seed * sig[(0, 0)];
                let trace = s00 + s11;
                let cond = trace * trace / det;
                if !(det > 0.0) || cond > MAX_CONDITION {
                    return Err(Error::IllConditioned(cond));
                }
                let adj = Matrix2::new(s11, -s01, -s01, s00);
                let a = adj * ds;
                let f = dd.dot(&(adj * dd)) / det + 0.5 * (a * a).trace() / (det * det);
                Ok(f.max(0.0))
            }
        }
    }
}

/// Fisher information of `spec` on `R(φ)ρR†(φ)`, from the Gaussian outcome
/// moments and their analytic φ-derivatives.
pub fn gaussian_fi(p: &StateParams, phi: f64, spec: &MeasurementSpec) -> Result<f64> {
    Sensitivity::at(p, phi).fi(spec)
}

/// Fisher information of `spec` on a state given directly by its moments.
pub fn gaussian_fi_moments(m: &GaussianMoments, spec: &MeasurementSpec) -> Result<f64> {
    Sensitivity::new(m).fi(spec)
}

/// Quantum Fisher information of the phase-shift family generated by `a†a`.
pub fn qfi(p: &StateParams) -> f64 {
    let n = p.n_th();
    let r = p.r();
    let u = 2.0 * n + 1.0;
    let squeeze = 2.0 * u * u * (2.0 * r).sinh().powi(2) / (2.0 * n * n + 2.0 * n + 1.0);
    // |cosh r − e^{iδ} sinh r|² = cosh 2r − sinh 2r cos δ
    let delta = p.theta_s() - 2.0 * p.theta_c();
    let disp = (2.0 * r).cosh() - (2.0 * r).sinh() * delta.cos();
    squeeze + 4.0 * p.alpha_mag().powi(2) / u * disp
}

const ORACLE_STEP: f64 = 1e-5;
const ORACLE_BOX: f64 = 8.0;

struct Pdf {
    mean: Vec<f64>,
    inv: Vec<f64>,
    log_norm: f64,
}

impl Pdf {
    fn new(m: &GaussianMoments, spec: &MeasurementSpec) -> Result<Self> {
        let dist = crate::measurement::outcome_distribution(m, spec)?;
        let k = dist.dim();
        let inv = dist.cov.clone().try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
        let log_norm = -0.5 * (dist.cov.determinant().ln() + k as f64 * (2.0 * std::f64::consts::PI).ln());
        Ok(Self { mean: dist.mean.as_slice().to_vec(), inv: inv.as_slice().to_vec(), log_norm })
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let q = if self.mean.len() == 1 {
            let z = y[0] - self.mean[0];
            self.inv[0] * z * z
        } else {
            let (z0, z1) = (y[0] - self.mean[0], y[1] - self.mean[1]);
            self.inv[0] * z0 * z0 + 2.0 * self.inv[1] * z0 * z1 + self.inv[3] * z1 * z1
        };
        (self.log_norm - 0.5 * q).exp()
    }
}

/// Brute-force Fisher information: `∫ (∂_φ p)² / p dy` with a central
/// difference in φ and adaptive quadrature over a ±8σ box aligned with the
/// principal axes of the outcome covariance.
pub fn numeric_fi_oracle(p: &StateParams, phi: f64, spec: &MeasurementSpec) -> Result<f64> {
    let h = ORACLE_STEP;
    let centre = Pdf::new(&phase_shifted_moments(p, phi), spec)?;
    let plus = Pdf::new(&phase_shifted_moments(p, phi + h), spec)?;
    let minus = Pdf::new(&phase_shifted_moments(p, phi - h), spec)?;
    let integrand = |y: &[f64]| {
        let p0 = centre.eval(y);
        if p0 <= 0.0 {
            return 0.0;
        }
        let dp = (plus.eval(y) - minus.eval(y)) / (2.0 * h);
        dp * dp / p0
    };
    let dist = crate::measurement::outcome_distribution(&phase_shifted_moments(p, phi), spec)?;
    if dist.dim() == 1 {
        let sd = dist.cov[(0, 0)].sqrt();
        let (a, b) = (centre.mean[0] - ORACLE_BOX * sd, centre.mean[0] + ORACLE_BOX * sd);
        let coarse = integrate(|x| integrand(&[x]), a, b, 1e-4)?;
        integrate(|x| integrand(&[x]), a, b, 1e-10 * coarse.max(1e-3))
    } else {
        let eig = SymmetricEigen::new(Matrix2::new(
            dist.cov[(0, 0)],
            dist.cov[(0, 1)],
            dist.cov[(1, 0)],
            dist.cov[(1, 1)],
        ));
        let v = eig.eigenvectors;
        let (w0, w1) = (ORACLE_BOX * eig.eigenvalues[0].sqrt(), ORACLE_BOX * eig.eigenvalues[1].sqrt());
        let (m0, m1) = (centre.mean[0], centre.mean[1]);
        let f = |u0: f64, u1: f64| {
            let y = [m0 + v[(0, 0)] * u0 + v[(0, 1)] * u1, m1 + v[(1, 0)] * u0 + v[(1, 1)] * u1];
            integrand(&y)
        };
        let coarse = integrate_2d(f, (-w0, w0), (-w1, w1), 1e-4)?;
        integrate_2d(f, (-w0, w0), (-w1, w1), 1e-10 * coarse.max(1e-3))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn coherent_homodyne_reaches_four_alpha_squared() {
        let p = StateParams::displaced_thermal(1.0, 0.3, 0.0).unwrap();
        // χ = 2(θc − φ) − ψ = π
        let spec = MeasurementSpec::homodyne(2.0 * 0.3 - PI).unwrap();
        assert_relative_eq!(gaussian_fi(&p, 0.0, &spec).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_carries_no_information() {
        let v = StateParams::vacuum();
        for spec in [MeasurementSpec::heterodyne(), MeasurementSpec::homodyne(0.7).unwrap()] {
            assert_eq!(gaussian_fi(&v, 0.4, &spec).unwrap(), 0.0);
            assert!(numeric_fi_oracle(&v, 0.4, &spec).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn sts_general_dyne_at_s_equal_r() {
        let (r, n) = (0.8, 0.4);
        let p = StateParams::squeezed_thermal(r, 0.9, n).unwrap();
        let phi = 0.2;
        let spec = MeasurementSpec::general_dyne(r, p.theta_s() - 2.0 * phi).unwrap();
        let expected = ((2.0 * n + 1.0) / (n + 1.0)).powi(2) * (2.0 * r).sinh().powi(2);
        let f = gaussian_fi(&p, phi, &spec).unwrap();
        assert_relative_eq!(f, expected, max_relative = 1e-12);
        assert_relative_eq!(numeric_fi_oracle(&p, phi, &spec).unwrap(), f, max_relative = 1e-5);
    }

    #[test]
    fn oracle_agrees_on_coherent_homodyne() {
        let p = StateParams::displaced_thermal(1.0, 0.0, 0.0).unwrap();
        let spec = MeasurementSpec::homodyne_at(0.9).unwrap();
        let f = gaussian_fi(&p, 0.0, &spec).unwrap();
        assert_relative_eq!(numeric_fi_oracle(&p, 0.0, &spec).unwrap(), f, max_relative = 1e-6);
    }

    #[test]
    fn oracle_agrees_on_dsts_heterodyne() {
        let p = StateParams::new(0.5, 1.0, 0.6, 0.4, 0.3).unwrap();
        let spec = MeasurementSpec::heterodyne();
        let f = gaussian_fi(&p, 0.3, &spec).unwrap();
        assert_relative_eq!(numeric_fi_oracle(&p, 0.3, &spec).unwrap(), f, max_relative = 1e-5);
    }

    #[test]
    fn qfi_examples() {
        assert_relative_eq!(qfi(&StateParams::displaced_thermal(1.0, 0.0, 0.0).unwrap()), 4.0);
        let svs = StateParams::squeezed_thermal(1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(qfi(&svs), 2.0 * 2f64.sinh().powi(2), max_relative = 1e-14);
        assert_relative_eq!(qfi(&svs), 26.308_2, epsilon = 1e-4);
        let dts = StateParams::displaced_thermal(1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(qfi(&dts), 4.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn huge_seed_squeezing_is_ill_conditioned() {
        let p = StateParams::vacuum();
        let spec = MeasurementSpec::general_dyne(20.0, 0.0).unwrap();
        assert!(matches!(gaussian_fi(&p, 0.0, &spec), Err(Error::IllConditioned(_))));
    }

    fn any_state() -> impl Strategy<Value = StateParams> {
        (0.0..2.0f64, 0.0..6.3f64, 0.0..1.2f64, 0.0..6.3f64, 0.0..2.0f64)
            .prop_map(|(a, tc, r, ts, n)| StateParams::new(a, tc, r, ts, n).unwrap())
    }

    proptest! {
        #[test]
        fn fi_never_exceeds_qfi(p in any_state(), phi in -1.0..1.0f64, s in 0.0..4.0f64, psi in 0.0..6.3f64, homo in any::<bool>()) {
            let spec = if homo { MeasurementSpec::homodyne(psi).unwrap() } else { MeasurementSpec::general_dyne(s, psi).unwrap() };
            let f = gaussian_fi(&p, phi, &spec).unwrap();
            prop_assert!(f >= 0.0);
            prop_assert!(f <= qfi(&p) * (1.0 + 1e-9) + 1e-12);
        }

        #[test]
        fn co_rotated_measurement_is_phase_independent(p in any_state(), phi in -2.0..2.0f64, s in 0.0..3.0f64, psi in 0.0..6.3f64) {
            let f0 = gaussian_fi(&p, 0.0, &MeasurementSpec::general_dyne(s, psi).unwrap()).unwrap();
            let f1 = gaussian_fi(&p, phi, &MeasurementSpec::general_dyne(s, psi - 2.0 * phi).unwrap()).unwrap();
            prop_assert!((f0 - f1).abs() <= 1e-9 * (1.0 + f0));
            let h0 = gaussian_fi(&p, 0.0, &MeasurementSpec::homodyne(psi).unwrap()).unwrap();
            let h1 = gaussian_fi(&p, phi, &MeasurementSpec::homodyne(psi - 2.0 * phi).unwrap()).unwrap();
            prop_assert!((h0 - h1).abs() <= 1e-9 * (1.0 + h0));
        }

        #[test]
        fn large_seed_squeezing_approaches_homodyne(p in any_state(), psi in 0.0..6.3f64) {
            let h = gaussian_fi(&p, 0.0, &MeasurementSpec::homodyne(psi).unwrap()).unwrap();
            let g = gaussian_fi(&p, 0.0, &MeasurementSpec::general_dyne(12.0, psi).unwrap()).unwrap();
            prop_assert!((g - h).abs() <= 1e-6 * (1.0 + h));
        }
    }
}
