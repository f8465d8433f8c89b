//! Single-mode Gaussian states in parametric and moment form.
//!
//! Quadratures follow `x1 = (a + a†)/√2`, `x2 = (a − a†)/(√2 i)`, so the
//! vacuum covariance is `½·I`. Every module in the crate shares this
//! convention.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on `det σ − ¼` when deciding physicality.
pub const PHYSICALITY_TOL: f64 = 1e-12;

/// Reduce an angle to `[0, 2π)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Phase-space rotation `exp(Jφ)` with `J = [[0, 1], [−1, 0]]`; the action of
/// `R(φ) = exp(−iφ a†a)` on the displacement vector.
pub fn rotation(phi: f64) -> Matrix2<f64> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// Generator of [`rotation`]: `d/dφ exp(Jφ) = J exp(Jφ)`.
pub fn rotation_generator() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// Covariance of `S(r e^{iθ}) ρ_T(n) S†`.
pub(crate) fn squeezed_thermal_covariance(r: f64, theta: f64, n_th: f64) -> Matrix2<f64> {
    let pref = n_th + 0.5;
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let (st, ct) = theta.sin_cos();
    Matrix2::new(
        pref * (ch - sh * ct),
        -pref * sh * st,
        -pref * sh * st,
        pref * (ch + sh * ct),
    )
}

/// Displaced squeezed thermal state `D(α) S(ξ) ρ_T(n_th) S† D†` with
/// `α = |α| e^{iθc}` and `ξ = r e^{iθs}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateParams {
    alpha_mag: f64,
    theta_c: f64,
    r: f64,
    theta_s: f64,
    n_th: f64,
}

impl StateParams {
    pub fn new(alpha_mag: f64, theta_c: f64, r: f64, theta_s: f64, n_th: f64) -> Result<Self> {
        for (name, v) in [("|alpha|", alpha_mag), ("r", r), ("n_th", n_th)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !theta_c.is_finite() || !theta_s.is_finite() {
            return Err(Error::InvalidParameter("angles must be finite".into()));
        }
        Ok(Self {
            alpha_mag,
            theta_c: reduce_angle(theta_c),
            r,
            theta_s: reduce_angle(theta_s),
            n_th,
        })
    }

    pub fn vacuum() -> Self {
        Self { alpha_mag: 0.0, theta_c: 0.0, r: 0.0, theta_s: 0.0, n_th: 0.0 }
    }

    /// Displaced thermal state.
    pub fn displaced_thermal(alpha_mag: f64, theta_c: f64, n_th: f64) -> Result<Self> {
        Self::new(alpha_mag, theta_c, 0.0, 0.0, n_th)
    }

    /// Squeezed thermal state.
    pub fn squeezed_thermal(r: f64, theta_s: f64, n_th: f64) -> Result<Self> {
        Self::new(0.0, 0.0, r, theta_s, n_th)
    }

    /// State with the optimal phase relation `θc = (π + θs)/2`, which
    /// maximizes the QFI for fixed `|α|, r, n_th`.
    pub fn canonical(alpha_mag: f64, r: f64, theta_s: f64, n_th: f64) -> Result<Self> {
        Self::new(alpha_mag, 0.5 * (PI + theta_s), r, theta_s, n_th)
    }

    pub fn alpha_mag(&self) -> f64 {
        self.alpha_mag
    }
    pub fn theta_c(&self) -> f64 {
        self.theta_c
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn theta_s(&self) -> f64 {
        self.theta_s
    }
    pub fn n_th(&self) -> f64 {
        self.n_th
    }

    /// Complex displacement `α`.
    pub fn alpha(&self) -> num_complex::Complex64 {
        num_complex::Complex64::from_polar(self.alpha_mag, self.theta_c)
    }

    /// Whether `θc = (π + θs)/2` holds modulo π (a sign flip of `α` leaves
    /// every bound unchanged).
    pub fn is_canonical(&self, tol: f64) -> bool {
        if self.alpha_mag == 0.0 || self.r == 0.0 {
            return true;
        }
        let mismatch = reduce_angle(2.0 * self.theta_c - PI - self.theta_s);
        mismatch.min(TAU - mismatch) <= tol
    }

    pub fn with_theta_c(self, theta_c: f64) -> Self {
        Self { theta_c: reduce_angle(theta_c), ..self }
    }
}

/// First and second moments of a single-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMoments {
    pub sigma: Matrix2<f64>,
    pub d: Vector2<f64>,
}

impl GaussianMoments {
    pub fn new(sigma: Matrix2<f64>, d: Vector2<f64>) -> Self {
        Self { sigma, d }
    }

    pub fn vacuum() -> Self {
        Self { sigma: Matrix2::identity() * 0.5, d: Vector2::zeros() }
    }

    /// `σ` symmetric positive definite with `det σ ≥ ¼` up to [`PHYSICALITY_TOL`].
    pub fn is_physical(&self) -> bool {
        let s = &self.sigma;
        let scale = s.amax().max(1.0);
        let symmetric = (s[(0, 1)] - s[(1, 0)]).abs() <= PHYSICALITY_TOL * scale;
        let det = s.determinant();
        symmetric && s[(0, 0)] > 0.0 && det > 0.0 && det >= 0.25 - PHYSICALITY_TOL
    }

    /// `N = ½(Tr σ + |d|² − 1)`.
    pub fn mean_photon_number(&self) -> f64 {
        0.5 * (self.sigma.trace() + self.d.norm_squared() - 1.0)
    }

    /// Phase shift `R(φ)`: `σ → O σ Oᵀ`, `d → O d` with `O = exp(Jφ)`.
    pub fn rotate(&self, phi: f64) -> Self {
        let o = rotation(phi);
        Self { sigma: o * self.sigma * o.transpose(), d: o * self.d }
    }

    /// Thermal-loss channel endpoint: `σ → (1−η)σ∞ + ησ`, `d → √η d`, with
    /// `σ∞ = (n_e + ½)·I`.
    pub fn apply_channel(&self, c: &ChannelParams) -> Self {
        let sigma_inf = Matrix2::identity() * (c.n_e + 0.5);
        Self {
            sigma: sigma_inf * (1.0 - c.eta) + self.sigma * c.eta,
            d: self.d * c.eta.sqrt(),
        }
    }
}

/// Thermal-loss channel: effective transmission `η = e^{−γt}` and thermal
/// photon number `n_e` of the environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    eta: f64,
    n_e: f64,
}

impl ChannelParams {
    pub fn new(eta: f64, n_e: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("eta must lie in [0, 1], got {eta}")));
        }
        if !(n_e >= 0.0) || !n_e.is_finite() {
            return Err(Error::InvalidParameter(format!("n_e must be finite and >= 0, got {n_e}")));
        }
        Ok(Self { eta, n_e })
    }

    /// Lossless channel.
    pub fn identity() -> Self {
        Self { eta: 1.0, n_e: 0.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn n_e(&self) -> f64 {
        self.n_e
    }
}

pub fn params_to_moments(p: &StateParams) -> GaussianMoments {
    let sigma = squeezed_thermal_covariance(p.r, p.theta_s, p.n_th);
    let (s, c) = p.theta_c.sin_cos();
    let d = Vector2::new(c, s) * (2f64.sqrt() * p.alpha_mag);
    GaussianMoments { sigma, d }
}

/// Inverse of [`params_to_moments`] by symplectic diagonalization.
///
/// `r ≥ 0` always; when `r = 0` the squeezing phase is unobservable and is
/// reported as 0.
pub fn moments_to_params(m: &GaussianMoments) -> Result<StateParams> {
    if !m.is_physical() {
        return Err(Error::InvalidState(format!(
            "covariance is not physical (det = {:.6e})",
            m.sigma.determinant()
        )));
    }
    let s = &m.sigma;
    // √det σ = n_th + ½
    let nu = s.determinant().max(0.25).sqrt();
    let n_th = (nu - 0.5).max(0.0);
    let sc = 0.5 * (s[(1, 1)] - s[(0, 0)]) / nu; // sinh 2r cos θs
    let ss = -0.5 * (s[(0, 1)] + s[(1, 0)]) / nu; // sinh 2r sin θs
    let sinh2r = sc.hypot(ss);
    let r = 0.5 * sinh2r.asinh();
    let theta_s = if sinh2r == 0.0 { 0.0 } else { ss.atan2(sc) };
    let alpha_mag = m.d.norm() / 2f64.sqrt();
    let theta_c = if alpha_mag == 0.0 { 0.0 } else { m.d[1].atan2(m.d[0]) };
    StateParams::new(alpha_mag, theta_c, r, theta_s, n_th)
}

pub fn mean_photon_number(m: &GaussianMoments) -> f64 {
    m.mean_photon_number()
}

/// `R(φ)` in parameter space: `θs → θs − 2φ`, `θc → θc − φ`.
pub fn apply_phase_shift(p: &StateParams, phi: f64) -> StateParams {
    StateParams {
        theta_c: reduce_angle(p.theta_c - phi),
        theta_s: reduce_angle(p.theta_s - 2.0 * phi),
        ..*p
    }
}

/// Thermal-loss channel in parameter space. Displacement scales by `√η`;
/// squeezing and thermal occupation follow from the eigenvalues of the mixed
/// covariance; both phases are unchanged.
pub fn apply_thermal_channel(p: &StateParams, c: &ChannelParams) -> StateParams {
    let eta = c.eta;
    let u_in = 1.0 + 2.0 * p.n_th;
    let u_e = 1.0 + 2.0 * c.n_e;
    let mix = eta * u_in + (1.0 - eta) * u_e;
    let root = (mix * mix + 4.0 * eta * (1.0 - eta) * u_in * u_e * p.r.sinh().powi(2)).sqrt();
    let n_th = (0.5 * root - 0.5).max(0.0);
    let r = 0.5 * (((1.0 - eta) * u_e + eta * u_in * (2.0 * p.r).exp()) / root).ln();
    StateParams {
        alpha_mag: eta.sqrt() * p.alpha_mag,
        r: r.max(0.0),
        n_th,
        ..*p
    }
}

pub fn apply_thermal_channel_moments(m: &GaussianMoments, c: &ChannelParams) -> GaussianMoments {
    m.apply_channel(c)
}

pub fn is_physical(m: &GaussianMoments) -> bool {
    m.is_physical()
}

/// Moments of `R(φ) ρ R†(φ)` evaluated without reducing angles.
pub(crate) fn phase_shifted_moments(p: &StateParams, phi: f64) -> GaussianMoments {
    params_to_moments(p).rotate(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn close(a: &GaussianMoments, b: &GaussianMoments, tol: f64) -> bool {
        (a.sigma - b.sigma).amax() <= tol && (a.d - b.d).amax() <= tol
    }

    fn angle_diff(a: f64, b: f64) -> f64 {
        let d = reduce_angle(a - b);
        d.min(TAU - d)
    }

    #[test]
    fn vacuum_moments() {
        let m = params_to_moments(&StateParams::vacuum());
        assert_eq!(m.sigma, Matrix2::identity() * 0.5);
        assert_eq!(m.d, Vector2::zeros());
    }

    #[test]
    fn coherent_moments() {
        let p = StateParams::new(1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let m = params_to_moments(&p);
        assert_relative_eq!(m.sigma, Matrix2::identity() * 0.5);
        assert_relative_eq!(m.d[0], 2f64.sqrt());
        assert_eq!(m.d[1], 0.0);
    }

    #[test]
    fn squeezed_thermal_moments() {
        let p = StateParams::squeezed_thermal(0.5, 0.0, 1.0).unwrap();
        let m = params_to_moments(&p);
        assert_relative_eq!(m.sigma[(0, 0)], 1.5 * (-1f64).exp(), epsilon = 1e-14);
        assert_relative_eq!(m.sigma[(1, 1)], 1.5 * 1f64.exp(), epsilon = 1e-14);
        assert_relative_eq!(m.sigma[(0, 0)], 0.551819161757164, epsilon = 1e-12);
        assert_relative_eq!(m.sigma[(1, 1)], 4.077422742688568, epsilon = 1e-12);
        assert_eq!(m.sigma[(0, 1)], 0.0);
    }

    #[test]
    fn inverse_of_vacuum() {
        let p = moments_to_params(&GaussianMoments::vacuum()).unwrap();
        assert_eq!(p, StateParams::vacuum());
    }

    #[test]
    fn inverse_recovers_squeezing() {
        let p = StateParams::squeezed_thermal(0.7, 1.1, 0.3).unwrap();
        let q = moments_to_params(&params_to_moments(&p)).unwrap();
        assert_relative_eq!(q.r(), 0.7, epsilon = 1e-12);
        assert_relative_eq!(q.theta_s(), 1.1, epsilon = 1e-12);
        assert_relative_eq!(q.n_th(), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn unphysical_is_rejected() {
        let m = GaussianMoments::new(Matrix2::identity() * 0.4, Vector2::zeros());
        assert!(!m.is_physical());
        assert!(matches!(moments_to_params(&m), Err(Error::InvalidState(_))));
        assert!(GaussianMoments::vacuum().is_physical());
    }

    #[test]
    fn photon_numbers() {
        assert_eq!(GaussianMoments::vacuum().mean_photon_number(), 0.0);
        let coh = StateParams::new(1.0, 0.3, 0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(params_to_moments(&coh).mean_photon_number(), 1.0, epsilon = 1e-14);
        let dts = StateParams::displaced_thermal(1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(params_to_moments(&dts).mean_photon_number(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn phase_shift_by_pi() {
        let p = StateParams::new(0.8, 0.4, 0.6, 1.0, 0.2).unwrap();
        assert_eq!(apply_phase_shift(&p, 0.0), p);
        let q = apply_phase_shift(&p, PI);
        assert!(angle_diff(q.theta_c(), p.theta_c() + PI) < 1e-12);
        assert!(angle_diff(q.theta_s(), p.theta_s()) < 1e-12);
    }

    #[test]
    fn channel_endpoints() {
        let p = StateParams::new(1.2, 0.3, 0.9, 2.0, 0.7).unwrap();
        let id = apply_thermal_channel(&p, &ChannelParams::new(1.0, 3.0).unwrap());
        assert_relative_eq!(id.alpha_mag(), p.alpha_mag(), epsilon = 1e-14);
        assert_relative_eq!(id.r(), p.r(), epsilon = 1e-14);
        assert_relative_eq!(id.n_th(), p.n_th(), epsilon = 1e-14);

        let dead = apply_thermal_channel(&p, &ChannelParams::new(0.0, 2.5).unwrap());
        assert_eq!(dead.alpha_mag(), 0.0);
        assert_relative_eq!(dead.r(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(dead.n_th(), 2.5, epsilon = 1e-14);

        let m = params_to_moments(&p);
        assert!(close(&m.apply_channel(&ChannelParams::identity()), &m, 0.0));
        let t = m.apply_channel(&ChannelParams::new(0.0, 1.0).unwrap());
        assert!(close(&t, &GaussianMoments::new(Matrix2::identity() * 1.5, Vector2::zeros()), 1e-15));
    }

    #[test]
    fn channel_matches_moment_route_on_grid() {
        for &eta in &[0.0, 0.25, 0.5, 0.9, 1.0] {
            for &n_e in &[0.0, 1.0, 3.0] {
                for &r in &[0.0, 0.5, 1.2] {
                    for &n_th in &[0.0, 0.5, 2.0] {
                        let p = StateParams::new(0.7, 0.9, r, 1.3, n_th).unwrap();
                        let c = ChannelParams::new(eta, n_e).unwrap();
                        let direct = params_to_moments(&apply_thermal_channel(&p, &c));
                        let via = params_to_moments(&p).apply_channel(&c);
                        assert!(close(&direct, &via, 1e-10), "eta={eta} n_e={n_e} r={r} n={n_th}");
                    }
                }
            }
        }
    }

    #[test]
    fn channel_example_by_moment_route() {
        // r_in = 1, n_in = 2, η = ½, n_e = 0
        let p = StateParams::squeezed_thermal(1.0, 0.0, 2.0).unwrap();
        let c = ChannelParams::new(0.5, 0.0).unwrap();
        let direct = apply_thermal_channel(&p, &c);
        let via = moments_to_params(&params_to_moments(&p).apply_channel(&c)).unwrap();
        assert_relative_eq!(direct.r(), via.r(), epsilon = 1e-12);
        assert_relative_eq!(direct.n_th(), via.n_th(), epsilon = 1e-12);
        // σ_out = diag(¼ + 1.25e^{−2}, ¼ + 1.25e^{2})
        let (a, b) = (0.25 + 1.25 * (-2f64).exp(), 0.25 + 1.25 * 2f64.exp());
        assert_relative_eq!(direct.n_th(), (a * b).sqrt() - 0.5, epsilon = 1e-12);
        assert_relative_eq!(direct.r(), 0.25 * (b / a).ln(), epsilon = 1e-12);
    }

    #[test]
    fn purity_boundary() {
        let pure = params_to_moments(&StateParams::new(1.0, 0.2, 0.8, 0.3, 0.0).unwrap());
        assert_relative_eq!(pure.sigma.determinant(), 0.25, epsilon = 1e-12);
        let mixed = params_to_moments(&StateParams::new(1.0, 0.2, 0.8, 0.3, 0.1).unwrap());
        assert!(mixed.sigma.determinant() > 0.25 + 1e-6);
    }

    fn arb_state() -> impl Strategy<Value = StateParams> {
        (0.0..2.0f64, 0.0..TAU, 0.05..1.5f64, 0.0..TAU, 0.0..3.0f64)
            .prop_map(|(a, tc, r, ts, n)| StateParams::new(a, tc, r, ts, n).unwrap())
    }

    proptest! {
        #[test]
        fn params_round_trip(p in arb_state()) {
            let m = params_to_moments(&p);
            prop_assert!(m.is_physical());
            let q = moments_to_params(&m).unwrap();
            prop_assert!(close(&params_to_moments(&q), &m, 1e-12));
            prop_assert!((q.r() - p.r()).abs() < 1e-10);
            prop_assert!((q.n_th() - p.n_th()).abs() < 1e-10);
            prop_assert!(angle_diff(q.theta_s(), p.theta_s()) < 1e-9);
        }

        #[test]
        fn phase_shift_is_rotation(p in arb_state(), phi in -4.0..4.0f64) {
            let lhs = params_to_moments(&apply_phase_shift(&p, phi));
            let rhs = params_to_moments(&p).rotate(phi);
            prop_assert!(close(&lhs, &rhs, 1e-12));
        }

        #[test]
        fn channel_commutes_with_rotation(p in arb_state(), phi in -4.0..4.0f64,
                                          eta in 0.0..=1.0f64, n_e in 0.0..4.0f64) {
            let c = ChannelParams::new(eta, n_e).unwrap();
            let m = params_to_moments(&p);
            prop_assert!(close(&m.rotate(phi).apply_channel(&c), &m.apply_channel(&c).rotate(phi), 1e-12));
        }

        #[test]
        fn photon_number_behaviour(p in arb_state(), phi in -4.0..4.0f64, eta in 0.0..=1.0f64) {
            let m = params_to_moments(&p);
            let n_in = m.mean_photon_number();
            prop_assert!((m.rotate(phi).mean_photon_number() - n_in).abs() < 1e-10 * (1.0 + n_in));
            let n_e = 0.5 * n_in;
            let c = ChannelParams::new(eta, n_e).unwrap();
            prop_assert!(m.apply_channel(&c).mean_photon_number() <= n_in + 1e-12);
        }
    }
}
