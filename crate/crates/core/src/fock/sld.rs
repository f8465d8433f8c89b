//! Closed-form and spectral SLD operators and their quadratic decomposition.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{build_operators, spectral::SpectralState, Bogoliubov, CutoffPolicy, FockOperator, Quadratic};
use crate::error::{Error, Result};
use crate::state::StateParams;

const I: C64 = C64::new(0.0, 1.0);

/// `𝒜 = (2n+1) sinh 2r / (2n² + 2n + 1)`.
pub(crate) fn sld_scale(p: &StateParams) -> f64 {
    let n = p.n_th();
    (2.0 * n + 1.0) * (2.0 * p.r()).sinh() / (2.0 * n * n + 2.0 * n + 1.0)
}

/// Displacement `ζ` of the dressed product-quadrature operator.
pub(crate) fn sld_zeta(p: &StateParams) -> C64 {
    let (r, n) = (p.r(), p.n_th());
    let alpha = p.alpha();
    let a = sld_scale(p);
    alpha * (2.0 * r).cosh()
        + alpha.conj() * C64::from_polar(1.0, p.theta_s()) * ((2.0 * r).sinh() + 1.0 / (a * (2.0 * n + 1.0)))
}

/// Identity coefficient `𝒞 = 2|α|² sin(2θc − θs) / (𝒜 (2n+1)²)`.
pub(crate) fn sld_identity_term(p: &StateParams) -> f64 {
    let n = p.n_th();
    2.0 * p.alpha_mag().powi(2) / (sld_scale(p) * (2.0 * n + 1.0).powi(2)) * (2.0 * p.theta_c() - p.theta_s()).sin()
}

/// Closed-form SLD of the phase-shifted state as a quadratic operator.
///
/// For `r > 0` this is `𝒜 U (X̂P̂+P̂X̂) U† + 𝒞` with
/// `U = R(φ) S(2ξ) D(ζ) R(−θs/2)`; for `r = 0` the displaced-thermal form,
/// and zero when the state is phase invariant.
pub fn sld_closed_form_quadratic(p: &StateParams, phi: f64) -> Quadratic {
    let n = p.n_th();
    if p.r() == 0.0 {
        if p.alpha_mag() == 0.0 {
            return Quadratic::zero();
        }
        let base = Quadratic { k1: 2.0 * I * p.alpha().conj() / (2.0 * n + 1.0), ..Quadratic::zero() };
        return base.conjugate(&Bogoliubov::product(&[Bogoliubov::rotation(phi), Bogoliubov::displacement(p.alpha())]));
    }
    let u = Bogoliubov::product(&[
        Bogoliubov::rotation(phi),
        Bogoliubov::squeeze(2.0 * p.r(), p.theta_s()),
        Bogoliubov::displacement(sld_zeta(p)),
        Bogoliubov::rotation(-0.5 * p.theta_s()),
    ]);
    Quadratic::xp_px().conjugate(&u).scale(sld_scale(p)).plus_identity(sld_identity_term(p))
}

/// Closed-form SLD on the cutoff that `policy` selects for the state.
pub fn sld_closed_form(p: &StateParams, phi: f64, policy: &CutoffPolicy) -> Result<FockOperator> {
    let cutoff = SpectralState::build(p, phi, policy)?.cutoff();
    Ok(FockOperator { matrix: sld_closed_form_quadratic(p, phi).to_matrix(cutoff), cutoff })
}

/// SLD assembled from the eigen-decomposition of `ρ_φ`; `2∂_φρ` for pure
/// states.
pub fn sld_spectral(p: &StateParams, phi: f64, policy: &CutoffPolicy) -> Result<FockOperator> {
    let st = SpectralState::build(p, phi, policy)?;
    let v = &st.vectors;
    let matrix = if st.is_pure() {
        let rho = st.density_matrix().matrix;
        let mut n_rho = rho.clone();
        for k in 0..n_rho.nrows() {
            n_rho.row_mut(k).iter_mut().for_each(|z| *z *= k as f64);
        }
        (&n_rho - n_rho.adjoint()) * (-2.0 * I)
    } else {
        v * st.spectral_sld_eigenbasis() * v.adjoint()
    };
    Ok(FockOperator { cutoff: st.cutoff(), matrix })
}

/// `Tr[ρ L²]`.
pub fn qfi_from_sld(rho: &FockOperator, l: &FockOperator) -> Result<f64> {
    if rho.cutoff != l.cutoff {
        return Err(Error::InvalidParameter(format!(
            "cutoff mismatch: state {} vs operator {}",
            rho.cutoff, l.cutoff
        )));
    }
    let rl = &rho.matrix * &l.matrix;
    let t: C64 = rl.iter().zip(l.matrix.transpose().iter()).map(|(a, b)| a * b).sum();
    Ok(t.re)
}

/// `L = l0 + l1·(X̂, P̂) + (X̂, P̂) l2 (X̂, P̂)ᵀ` with the symmetric ordering
/// `X̂P̂ + P̂X̂` for the off-diagonal entry of `l2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticDecomposition {
    pub l0: f64,
    pub l1: Vector2<f64>,
    pub l2: Matrix2<f64>,
    /// Relative Frobenius residual of the fit.
    pub residual: f64,
}

const DECOMPOSITION_TOL: f64 = 1e-8;
const DECOMPOSITION_BLOCK: usize = 40;

/// Least-squares fit of `L` on `{I, X̂, P̂, X̂², P̂², X̂P̂+P̂X̂}` over a block
/// clear of the truncation edge.
pub fn sld_quadratic_decomposition(l: &FockOperator) -> Result<QuadraticDecomposition> {
    let b = l.safe_dim().min(DECOMPOSITION_BLOCK);
    if b < 3 {
        return Err(Error::InvalidParameter(format!("cutoff {} too small to decompose", l.cutoff)));
    }
    let ops = build_operators(l.cutoff)?;
    let (x, p) = (&ops.x.matrix, &ops.p.matrix);
    let basis = [
        DMatrix::<C64>::identity(l.cutoff, l.cutoff),
        x.clone(),
        p.clone(),
        x * x,
        p * p,
        x * p + p * x,
    ];
    let rows = 2 * b * b;
    let mut a = DMatrix::<f64>::zeros(rows, basis.len());
    let mut rhs = DVector::<f64>::zeros(rows);
    for i in 0..b {
        for j in 0..b {
            let row = 2 * (i * b + j);
            rhs[row] = l.matrix[(i, j)].re;
            rhs[row + 1] = l.matrix[(i, j)].im;
            for (c, m) in basis.iter().enumerate() {
                a[(row, c)] = m[(i, j)].re;
                a[(row + 1, c)] = m[(i, j)].im;
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::NumericFailure(format!("least squares failed: {e}")))?;
    let scale = rhs.norm();
    let residual = if scale > 0.0 { (&a * &coef - &rhs).norm() / scale } else { 0.0 };
    if residual > DECOMPOSITION_TOL {
        return Err(Error::DecompositionFailure(residual));
    }
    Ok(QuadraticDecomposition {
        l0: coef[0],
        l1: Vector2::new(coef[1], coef[2]),
        l2: Matrix2::new(coef[3], coef[5], coef[5], coef[4]),
        residual,
    })
}
