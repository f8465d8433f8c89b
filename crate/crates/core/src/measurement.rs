//! Gaussian measurements: general-dyne with a squeezed-vacuum seed and ideal
//! homodyne detection.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{reduce_angle, squeezed_thermal_covariance, GaussianMoments};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeasurementKind {
    GeneralDyne,
    Homodyne,
}

/// A Gaussian measurement. For general-dyne the seed is `S(s e^{iψ})|0⟩`;
/// for homodyne `s` is infinite and the measured quadrature is `X_{ψ/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementSpec {
    kind: MeasurementKind,
    s: f64,
    psi: f64,
}

impl MeasurementSpec {
    pub fn general_dyne(s: f64, psi: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("seed squeezing must be finite and >= 0, got {s}")));
        }
        if !psi.is_finite() {
            return Err(Error::InvalidParameter("psi must be finite".into()));
        }
        Ok(Self { kind: MeasurementKind::GeneralDyne, s, psi: reduce_angle(psi) })
    }

    pub fn heterodyne() -> Self {
        Self { kind: MeasurementKind::GeneralDyne, s: 0.0, psi: 0.0 }
    }

    /// Homodyne detection of `X_{ψ/2}`.
    pub fn homodyne(psi: f64) -> Result<Self> {
        if !psi.is_finite() {
            return Err(Error::InvalidParameter("psi must be finite".into()));
        }
        Ok(Self { kind: MeasurementKind::Homodyne, s: f64::INFINITY, psi: reduce_angle(psi) })
    }

    /// Homodyne detection of `X_θ`.
    pub fn homodyne_at(theta: f64) -> Result<Self> {
        Self::homodyne(2.0 * theta)
    }

    pub fn kind(&self) -> MeasurementKind {
        self.kind
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn psi(&self) -> f64 {
        self.psi
    }
    pub fn is_homodyne(&self) -> bool {
        self.kind == MeasurementKind::Homodyne
    }

    /// Angle `θ = ψ/2` of the quadrature selected by the seed's squeezed axis.
    pub fn quadrature_angle(&self) -> f64 {
        0.5 * self.psi
    }

    /// Dimension of one outcome.
    pub fn outcome_dim(&self) -> usize {
        match self.kind {
            MeasurementKind::GeneralDyne => 2,
            MeasurementKind::Homodyne => 1,
        }
    }
}

/// Covariance of the squeezed-vacuum seed `S(s e^{iψ})|0⟩`.
pub fn seed_covariance(spec: &MeasurementSpec) -> Result<Matrix2<f64>> {
    match spec.kind {
        MeasurementKind::GeneralDyne => Ok(squeezed_thermal_covariance(spec.s, spec.psi, 0.0)),
        MeasurementKind::Homodyne => Err(Error::UnsupportedKind("homodyne")),
    }
}

/// Gaussian law of a measurement record: 2-vector (general-dyne) or scalar
/// (homodyne).
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl OutcomeDistribution {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::InvalidParameter("mean/covariance dimension mismatch".into()));
        }
        if cov.clone().cholesky().is_none() {
            return Err(Error::InvalidParameter("outcome covariance must be positive definite".into()));
        }
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_density(&self, y: &[f64]) -> Result<f64> {
        let k = self.dim();
        if y.len() != k {
            return Err(Error::InvalidParameter(format!("outcome has length {}, expected {k}", y.len())));
        }
        let chol = self.cov.clone().cholesky().ok_or(Error::IllConditioned(f64::INFINITY))?;
        let diff = DVector::from_column_slice(y) - &self.mean;
        let z = chol.l().solve_lower_triangular(&diff).expect("cholesky factor is nonsingular");
        let log_det: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
        Ok(-0.5 * (z.norm_squared() + log_det + k as f64 * (2.0 * PI).ln()))
    }

    pub fn density(&self, y: &[f64]) -> Result<f64> {
        self.log_density(y).map(f64::exp)
    }

    /// Append `count` draws to `out` (row-major, `dim` values per draw).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, count: usize, out: &mut Vec<f64>) {
        let k = self.dim();
        let l = self.cov.clone().cholesky().expect("validated on construction").unpack();
        out.reserve(count * k);
        let mut z = vec![0.0; k];
        for _ in 0..count {
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            for i in 0..k {
                let mut v = self.mean[i];
                for j in 0..=i {
                    v += l[(i, j)] * z[j];
                }
                out.push(v);
            }
        }
    }
}

/// Outcome law of `spec` applied to a state with moments `m`.
///
/// General-dyne: mean `d`, covariance `σ + σ_seed`, in the canonical
/// quadrature frame. Homodyne at `θ = ψ/2`: mean `u·d`, variance `uᵀσu` with
/// `u = (cos θ, sin θ)`.
pub fn outcome_distribution(m: &GaussianMoments, spec: &MeasurementSpec) -> Result<OutcomeDistribution> {
    match spec.kind {
        MeasurementKind::GeneralDyne => {
            let cov = m.sigma + seed_covariance(spec)?;
            OutcomeDistribution::new(
                DVector::from_column_slice(m.d.as_slice()),
                DMatrix::from_column_slice(2, 2, cov.as_slice()),
            )
        }
        MeasurementKind::Homodyne => {
            let (s, c) = spec.quadrature_angle().sin_cos();
            let u = nalgebra::Vector2::new(c, s);
            let var = (u.transpose() * m.sigma * u)[(0, 0)];
            OutcomeDistribution::new(DVector::from_element(1, u.dot(&m.d)), DMatrix::from_element(1, 1, var))
        }
    }
}

/// RNG for one independent stream; `(seed, stream)` fully determines it.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `count` i.i.d. draws; deterministic in `seed`.
pub fn sample_outcomes(dist: &OutcomeDistribution, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be >= 1".into()));
    }
    let mut flat = Vec::new();
    dist.sample_into(&mut stream_rng(seed, 0), count, &mut flat);
    Ok(flat.chunks(dist.dim()).map(<[f64]>::to_vec).collect())
}

/// Beam-splitter transmittance to seed squeezing, `s = ln √(τ/(1−τ))`.
pub fn transmittance_to_s(tau: f64) -> Result<f64> {
    if !(0.5..1.0).contains(&tau) {
        return Err(Error::Domain { value: tau, domain: "[1/2, 1)" });
    }
    Ok(0.5 * (tau / (1.0 - tau)).ln())
}

/// Inverse of [`transmittance_to_s`].
pub fn s_to_transmittance(s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain { value: s, domain: "[0, inf)" });
    }
    Ok(1.0 / (1.0 + (-2.0 * s).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{params_to_moments, StateParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn seed_covariance_cases() {
        assert_eq!(seed_covariance(&MeasurementSpec::heterodyne()).unwrap(), Matrix2::identity() * 0.5);
        let c = seed_covariance(&MeasurementSpec::general_dyne(1.0, 0.0).unwrap()).unwrap();
        assert_relative_eq!(c[(0, 0)], 0.5 * (-2f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(c[(1, 1)], 0.5 * 2f64.exp(), epsilon = 1e-14);
        assert_eq!(c[(0, 1)], 0.0);
        assert!(matches!(
            seed_covariance(&MeasurementSpec::homodyne(0.3).unwrap()),
            Err(Error::UnsupportedKind(_))
        ));
    }

    #[test]
    fn vacuum_heterodyne() {
        let d = outcome_distribution(&GaussianMoments::vacuum(), &MeasurementSpec::heterodyne()).unwrap();
        assert_eq!(d.mean.as_slice(), &[0.0, 0.0]);
        assert_eq!(d.cov, DMatrix::identity(2, 2));
        assert_relative_eq!(d.density(&[0.0, 0.0]).unwrap(), 1.0 / (2.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn coherent_homodyne() {
        let m = params_to_moments(&StateParams::new(1.0, 0.0, 0.0, 0.0, 0.0).unwrap());
        let d = outcome_distribution(&m, &MeasurementSpec::homodyne_at(0.0).unwrap()).unwrap();
        assert_relative_eq!(d.mean[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(d.cov[(0, 0)], 0.5, epsilon = 1e-15);
        assert_relative_eq!(d.log_density(&[2f64.sqrt()]).unwrap(), -0.5 * (PI).ln(), epsilon = 1e-14);
    }

    #[test]
    fn large_seed_squeezing_approaches_homodyne() {
        let m = params_to_moments(&StateParams::new(0.7, 0.4, 0.6, 1.1, 0.3).unwrap());
        let psi = 0.9;
        let s = 10.0;
        let gd = outcome_distribution(&m, &MeasurementSpec::general_dyne(s, psi).unwrap()).unwrap();
        let hd = outcome_distribution(&m, &MeasurementSpec::homodyne(psi).unwrap()).unwrap();
        let (sn, cs) = (0.5 * psi).sin_cos();
        let u = DVector::from_column_slice(&[cs, sn]);
        assert_relative_eq!(u.dot(&gd.mean), hd.mean[0], epsilon = 1e-14);
        let var = (u.transpose() * &gd.cov * &u)[(0, 0)];
        // rounding in the anti-squeezed entries dominates e^{-2s} at s = 10
        let slack = (-2.0 * s).exp() + 4.0 * f64::EPSILON * (2.0 * s).exp();
        assert!((var - hd.cov[(0, 0)]).abs() <= slack);
    }

    #[test]
    fn sampling_statistics() {
        let dist = OutcomeDistribution::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        let n = 100_000;
        let draws = sample_outcomes(&dist, n, 11).unwrap();
        let mut mean = [0.0; 2];
        let mut cov = [[0.0; 2]; 2];
        for y in &draws {
            for i in 0..2 {
                mean[i] += y[i] / n as f64;
                for j in 0..2 {
                    cov[i][j] += y[i] * y[j] / n as f64;
                }
            }
        }
        for m in mean {
            assert!(m.abs() < 4.0 / (n as f64).sqrt());
        }
        let frob = ((cov[0][0] - 1.0).powi(2) + 2.0 * cov[0][1].powi(2) + (cov[1][1] - 1.0).powi(2)).sqrt();
        assert!(frob < 0.05 * 2f64.sqrt());
        assert_eq!(draws, sample_outcomes(&dist, n, 11).unwrap());
        assert_ne!(draws, sample_outcomes(&dist, n, 12).unwrap());
    }

    #[test]
    fn correlated_sample_covariance() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.7, 0.7, 0.5]);
        let dist = OutcomeDistribution::new(DVector::from_column_slice(&[1.0, -2.0]), cov.clone()).unwrap();
        let n = 100_000;
        let draws = sample_outcomes(&dist, n, 5).unwrap();
        let mut est = DMatrix::zeros(2, 2);
        for y in &draws {
            let v = DVector::from_column_slice(y) - &dist.mean;
            est += &v * v.transpose() / n as f64;
        }
        assert!((est - &cov).norm() < 0.05 * cov.norm());
    }

    #[test]
    fn transmittance_mapping() {
        assert_eq!(transmittance_to_s(0.5).unwrap(), 0.0);
        let s = transmittance_to_s(0.75).unwrap();
        assert_relative_eq!(s, 3f64.sqrt().ln(), epsilon = 1e-15);
        assert_relative_eq!(s_to_transmittance(s).unwrap(), 0.75, epsilon = 1e-14);
        assert!(transmittance_to_s(0.999999).unwrap() > transmittance_to_s(0.99).unwrap());
        assert!(transmittance_to_s(1.0).is_err());
        assert!(transmittance_to_s(0.3).is_err());
    }

    proptest! {
        #[test]
        fn seed_is_pure(s in 0.0..4.0f64, psi in 0.0..6.3f64) {
            let c = seed_covariance(&MeasurementSpec::general_dyne(s, psi).unwrap()).unwrap();
            prop_assert!((c.determinant() - 0.25).abs() < 1e-12 * c.amax().powi(2).max(1.0));
        }

        #[test]
        fn transmittance_round_trip(tau in 0.5..0.999f64) {
            let back = s_to_transmittance(transmittance_to_s(tau).unwrap()).unwrap();
            prop_assert!((back - tau).abs() < 1e-14);
        }
    }
}
