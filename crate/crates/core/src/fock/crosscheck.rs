//! Cross-checks of the SLD derivation and of homodyne optimality for
//! squeezed vacuum.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::sld::{sld_closed_form_quadratic, sld_identity_term, sld_scale, sld_zeta};
use super::spectral::eigen_columns;
use super::{Bogoliubov, CutoffPolicy, Quadratic, SpectralState};
use crate::error::{Error, Result};
use crate::state::StateParams;

const I: C64 = C64::new(0.0, 1.0);

/// Two routes to the closed-form SLD, compared coefficient by coefficient.
#[derive(Debug, Clone, Serialize)]
pub struct SldRouteReport {
    /// `ζ` as used by the closed form.
    pub zeta_main: C64,
    /// `ζ` rebuilt from `|β| = |α|/(𝒜(2n+1))`, `θ_b = θs − θc`.
    pub zeta_recipe: C64,
    /// Identity coefficient `𝒞` of the closed form.
    pub c_main: f64,
    /// `C = 2𝒜|β|² sin(θs − 2θc)` of the derivation, entering as `−C`.
    pub c_derivation: f64,
    /// `L₁ + L₂` versus `Ô − C` in the undressed frame.
    pub identity_error: f64,
    /// Closed form versus the dressed `L₁ + L₂`.
    pub operator_error: f64,
}

/// Requires `r > 0`.
pub fn sld_route_consistency(p: &StateParams, phi: f64) -> Result<SldRouteReport> {
    if p.r() == 0.0 {
        return Err(Error::Domain { value: 0.0, domain: "r > 0" });
    }
    let (r, n, ts, tc) = (p.r(), p.n_th(), p.theta_s(), p.theta_c());
    let alpha = p.alpha();
    let a = sld_scale(p);
    let (ch, sh) = (r.cosh(), r.sinh());

    let l12 = Quadratic {
        k1: 2.0 * I * (alpha.conj() * ch - alpha * C64::from_polar(sh, -ts)) / (2.0 * n + 1.0),
        k2: -I * C64::from_polar(a, -ts),
        ..Quadratic::zero()
    };
    let beta = C64::from_polar(p.alpha_mag() / (a * (2.0 * n + 1.0)), ts - tc);
    let o = Quadratic::xp_px()
        .conjugate(&Bogoliubov::product(&[
            Bogoliubov::squeeze(r, ts),
            Bogoliubov::displacement(beta),
            Bogoliubov::rotation(-0.5 * ts),
        ]))
        .scale(a);
    let c_derivation = 2.0 * a * beta.norm_sqr() * (ts - 2.0 * tc).sin();
    let identity_error = l12.max_diff(&o.plus_identity(-c_derivation));

    let dressed = l12.conjugate(&Bogoliubov::product(&[
        Bogoliubov::rotation(phi),
        Bogoliubov::displacement(alpha),
        Bogoliubov::squeeze(r, ts),
    ]));
    let operator_error = dressed.max_diff(&sld_closed_form_quadratic(p, phi));

    // S†(2ξ) D(α) S(2ξ) = D(α cosh 2r + α* e^{iθs} sinh 2r)
    let zeta_recipe = alpha * (2.0 * r).cosh() + alpha.conj() * C64::from_polar((2.0 * r).sinh(), ts) + beta;
    Ok(SldRouteReport {
        zeta_main: sld_zeta(p),
        zeta_recipe,
        c_main: sld_identity_term(p),
        c_derivation,
        identity_error,
        operator_error,
    })
}

/// Homodyne optimality check for squeezed vacuum.
#[derive(Debug, Clone, Serialize)]
pub struct HomodyneOptimalityReport {
    pub r: f64,
    /// Homodyne parameter ψ; the measured quadrature angle is ψ/2.
    pub psi: f64,
    pub max_imag: f64,
    /// Largest deviation of the real part from
    /// `2√2 sinh 2r · e^{−x²c}(2x²c − 1)√c/√(2π)`, `c = cosh 2r`.
    pub max_real_error: f64,
    /// Real part divided by the bare form `e^{−x²c}(2x²c − 1)√c/√(2π)`,
    /// taken at the grid point of largest magnitude.
    pub bare_form_ratio: f64,
    /// `(x, Re, Im)` per grid point.
    pub points: Vec<(f64, f64, f64)>,
}

/// `h_k(x) = ⟨k|x⟩` for `k < dim`.
fn hermite_functions(x: f64, dim: usize) -> Vec<f64> {
    let mut h = vec![0.0; dim];
    h[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if dim > 1 {
        h[1] = std::f64::consts::SQRT_2 * x * h[0];
    }
    for k in 1..dim.saturating_sub(1) {
        let kf = k as f64;
        h[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
    }
    h
}

/// `Tr(ρ_φ Π_x L)` for `ρ_φ = R(φ)S(r)|0⟩⟨0|S†R†`, homodyne at
/// `cos χ = tanh 2r` with `ψ = θs − 2φ − χ`, and
/// `L = 2i sinh 2r · R S (a†² − a²) S† R†` (twice the SLD).
pub fn svs_homodyne_optimality_check(r: f64, phi: f64, x_grid: &[f64]) -> Result<HomodyneOptimalityReport> {
    if !(r > 0.0) {
        return Err(Error::Domain { value: r, domain: "r > 0" });
    }
    let ts = 0.0;
    let p = StateParams::squeezed_thermal(r, ts, 0.0)?;
    // homodyne wavefunctions do not decay in k, so the edge must be empty
    let rows = 2 * SpectralState::build(&p, phi, &CutoffPolicy { target_trace_deficit: 1e-15, max_cutoff: 5000 })?.cutoff();
    let psi_vec: Vec<C64> = eigen_columns(C64::new(0.0, 0.0), r, ts, phi, rows, 1).column(0).iter().copied().collect();

    let l = Quadratic { k2: -2.0 * I * C64::from_polar((2.0 * r).sinh(), -ts), ..Quadratic::zero() }
        .conjugate(&Bogoliubov::product(&[Bogoliubov::rotation(phi), Bogoliubov::squeeze(r, ts)]));
    let mut l_psi = vec![C64::new(0.0, 0.0); rows];
    l.apply(&psi_vec, &mut l_psi);

    let chi = -(2.0 * r).tanh().acos();
    let psi = ts - 2.0 * phi - chi;
    let theta = 0.5 * psi;
    let c = (2.0 * r).cosh();
    let prefactor = 2.0 * std::f64::consts::SQRT_2 * (2.0 * r).sinh();
    let bare = |x: f64| (-x * x * c).exp() * (2.0 * x * x * c - 1.0) * c.sqrt() / (2.0 * std::f64::consts::PI).sqrt();

    let mut points = Vec::with_capacity(x_grid.len());
    let (mut max_imag, mut max_real_error) = (0.0f64, 0.0f64);
    let (mut best, mut bare_form_ratio) = (0.0f64, f64::NAN);
    for &x in x_grid {
        let h = hermite_functions(x, rows);
        // ⟨x_θ|v⟩ with ⟨k|x_θ⟩ = e^{iθk} h_k(x)
        let project = |v: &[C64]| -> C64 {
            v.iter().enumerate().map(|(k, z)| C64::from_polar(h[k], -theta * k as f64) * z).sum()
        };
        let t = project(&psi_vec).conj() * project(&l_psi);
        max_imag = max_imag.max(t.im.abs());
        max_real_error = max_real_error.max((t.re - prefactor * bare(x)).abs());
        if bare(x).abs() > best {
            best = bare(x).abs();
            bare_form_ratio = t.re / bare(x);
        }
        points.push((x, t.re, t.im));
    }
    Ok(HomodyneOptimalityReport { r, psi, max_imag, max_real_error, bare_form_ratio, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_routes_agree() {
        for (a, r, ts, n) in [(0.5, 0.7, 0.3, 0.4), (1.2, 0.3, 2.0, 0.0), (0.8, 1.0, 4.0, 1.5)] {
            let p = StateParams::canonical(a, r, ts, n).unwrap();
            let rep = sld_route_consistency(&p, 0.2).unwrap();
            assert!((rep.zeta_main - rep.zeta_recipe).norm() < 1e-12);
            assert!((rep.c_main + rep.c_derivation).abs() < 1e-12);
            assert!(rep.identity_error < 1e-12, "{}", rep.identity_error);
            assert!(rep.operator_error < 1e-10, "{}", rep.operator_error);
        }
        // the phase relation is not needed for the algebra
        let p = StateParams::new(0.7, 0.2, 0.5, 1.0, 0.3).unwrap();
        let rep = sld_route_consistency(&p, -0.4).unwrap();
        assert!(rep.operator_error < 1e-10);
    }

    #[test]
    fn squeezed_vacuum_homodyne_is_real() {
        let grid: Vec<f64> = (0..=16).map(|i| -4.0 + 0.5 * i as f64).collect();
        let rep = svs_homodyne_optimality_check(0.5, 0.2, &grid).unwrap();
        assert!(rep.max_imag < 1e-10, "{}", rep.max_imag);
        assert!(rep.max_real_error < 1e-8, "{}", rep.max_real_error);
        assert!((rep.bare_form_ratio - 2.0 * 2f64.sqrt() * 1f64.sinh()).abs() < 1e-8);
    }

    #[test]
    fn zero_crossing() {
        let r = 0.5f64;
        let x0 = (1.0 / (2.0 * (2.0 * r).cosh())).sqrt();
        let rep = svs_homodyne_optimality_check(r, 0.0, &[x0]).unwrap();
        assert!(rep.points[0].1.abs() < 1e-12);
    }
}
