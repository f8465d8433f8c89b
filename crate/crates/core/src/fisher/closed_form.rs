//! Closed-form optimal Gaussian measurements, their Fisher information, and
//! the boundaries between the three optimal types.
//!
//! All closed forms assume the phase relation `θc = (π + θs)/2`. The
//! measurement phase is written through `ψ = θs − 2φ − χ`.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::measurement::MeasurementSpec;
use crate::state::StateParams;

use super::OptimalType;

/// Relative slack used when testing region membership and ties.
pub const BOUNDARY_TOL: f64 = 1e-9;

const CANONICAL_TOL: f64 = 1e-9;

/// `|α̃|² = |α|² / (e^{−2r} sinh² 2r)`; infinite at `r = 0` with `α ≠ 0`.
pub fn alpha_tilde_sq(p: &StateParams) -> f64 {
    let a2 = p.alpha_mag().powi(2);
    if a2 == 0.0 {
        return 0.0;
    }
    let scale = (-2.0 * p.r()).exp() * (2.0 * p.r()).sinh().powi(2);
    a2 / scale
}

/// QFI prefactor of squeezed thermal states, `H = C_H sinh² 2r`.
pub fn c_h(n_th: f64) -> f64 {
    2.0 * (2.0 * n_th + 1.0).powi(2) / (2.0 * n_th * n_th + 2.0 * n_th + 1.0)
}

/// Homodyne prefactor for squeezed thermal states.
pub fn c_f_type_i(_n_th: f64) -> f64 {
    2.0
}

/// General-dyne (`s = r`) prefactor for squeezed thermal states.
pub fn c_f_type_ii(n_th: f64) -> f64 {
    ((2.0 * n_th + 1.0) / (n_th + 1.0)).powi(2)
}

pub fn alpha_tilde_max_ii(n_th: f64) -> f64 {
    (2.0 * (1.0 + 2.0 * n_th)).sqrt()
}

pub fn alpha_tilde_max_iii(n_th: f64) -> f64 {
    (1.0 + 2.0 * n_th).powf(1.5)
}

/// Reduced displacement at which Type-II and Type-III give equal FI. `None`
/// when the two curves do not cross for `|α̃| > 0`.
pub fn alpha_tilde_max_ii_iii(n_th: f64) -> Option<f64> {
    if n_th <= 0.0 {
        return None;
    }
    let u = 2.0 * n_th + 1.0;
    let rad = u * (1.0 - (SQRT_2 - 1.0) * u) / n_th;
    // tolerate rounding where the curve meets the α̃ = 0 axis
    (rad >= -1e-12).then(|| rad.max(0.0).sqrt())
}

/// Point `(n_th, |α̃|)` where the Type-II and Type-III existence limits meet,
/// found by bisection on `α̃_max^(II)(n) = α̃_max^(III)(n)`.
pub fn triple_point() -> (f64, f64) {
    let g = |n: f64| alpha_tilde_max_ii(n) - alpha_tilde_max_iii(n);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let n = 0.5 * (lo + hi);
    (n, alpha_tilde_max_ii(n))
}

/// Thermal occupation where homodyne and `s = r` general-dyne tie for
/// squeezed thermal states.
pub fn sts_crossover_n_th() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}

/// `cos χ` of the Type-II homodyne angle.
pub fn cos_chi_type_ii(p: &StateParams) -> Result<f64> {
    let (r, n) = (p.r(), p.n_th());
    if r == 0.0 {
        return Err(Error::UndefinedType(OptimalType::TypeII));
    }
    let u = 2.0 * n + 1.0;
    let a2 = p.alpha_mag().powi(2);
    let coth = 1.0 / (2.0 * r).tanh();
    Ok((4.0 * u * (2.0 * r).sinh() + 2.0 * coth * (1.0 + coth) * a2)
        / (4.0 * u * (2.0 * r).cosh() + 2.0 * (1.0 + coth) * a2))
}

/// Optimal seed squeezing of the Type-III general-dyne measurement.
pub fn s_opt(p: &StateParams) -> Result<f64> {
    let (r, n) = (p.r(), p.n_th());
    if r == 0.0 {
        return Err(Error::UndefinedType(OptimalType::TypeIII));
    }
    check_type_iii(p)?;
    let u = 2.0 * n + 1.0;
    let a2 = p.alpha_mag().powi(2);
    let e2 = (2.0 * r).exp();
    let sh = (2.0 * r).sinh();
    let x = u.powi(3) * sh * sh;
    let num = u * e2 * e2 * a2 + u.powf(1.5) * e2 * sh * (x + 4.0 * n * (n + 1.0) * e2 * a2).sqrt();
    let den = x - e2 * a2;
    if den <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * (num / den).ln())
}

fn check_type_iii(p: &StateParams) -> Result<()> {
    let at2 = alpha_tilde_sq(p);
    let limit = alpha_tilde_max_iii(p.n_th()).powi(2);
    if at2 > limit * (1.0 + BOUNDARY_TOL) {
        return Err(Error::NoRealSOpt { alpha_tilde_sq: at2, limit });
    }
    Ok(())
}

/// FI of the Type-I homodyne measurement; at `r = 0` the DTS optimum.
pub fn fi_type_i(p: &StateParams) -> f64 {
    4.0 * (2.0 * p.r()).exp() * p.alpha_mag().powi(2) / (2.0 * p.n_th() + 1.0)
}

pub fn fi_type_ii(p: &StateParams) -> Result<f64> {
    let (r, n) = (p.r(), p.n_th());
    if r == 0.0 {
        return Err(Error::UndefinedType(OptimalType::TypeII));
    }
    let u = 2.0 * n + 1.0;
    let coth = 1.0 / (2.0 * r).tanh();
    let t = 2.0 * u * (2.0 * r).sinh() + (1.0 + coth) * p.alpha_mag().powi(2);
    Ok(t * t / (2.0 * u * u))
}

/// FI of the Type-III general-dyne measurement, in a form that stays finite
/// as `n_th → 0`.
pub fn fi_type_iii(p: &StateParams) -> Result<f64> {
    let (r, n) = (p.r(), p.n_th());
    if r == 0.0 {
        return Err(Error::UndefinedType(OptimalType::TypeIII));
    }
    check_type_iii(p)?;
    let u = 2.0 * n + 1.0;
    let a2 = p.alpha_mag().powi(2);
    let e2 = (2.0 * r).exp();
    let sh = (2.0 * r).sinh();
    let x = u.powi(3) * sh * sh;
    let s = (1.0 + 4.0 * n * (n + 1.0) * e2 * a2 / x).sqrt();
    Ok(c_f_type_ii(n) * sh * sh + 2.0 * e2 * a2 / (n + 1.0) + 4.0 * e2 * e2 * a2 * a2 / (x * (1.0 + s).powi(2)))
}

/// Type-III FI exactly as the textbook expression (singular at `n_th = 0`);
/// kept as an independent check of [`fi_type_iii`].
pub fn fi_type_iii_direct(p: &StateParams) -> f64 {
    let (r, n) = (p.r(), p.n_th());
    let u = 2.0 * n + 1.0;
    let a2 = p.alpha_mag().powi(2);
    let e2 = (2.0 * r).exp();
    let sh = (2.0 * r).sinh();
    let den = 2.0 * n * n * (n + 1.0).powi(2);
    (u * u * (2.0 * n * n + 2.0 * n + 1.0) * sh * sh + 2.0 * n * (n + 1.0) * u * e2 * a2
        - u.powf(1.5) * sh * (u.powi(3) * sh * sh + 4.0 * n * (n + 1.0) * e2 * a2).sqrt())
        / den
}

/// Closed-form FI of the optimal measurement of type `t`.
pub fn closed_form_fi(p: &StateParams, t: OptimalType) -> Result<f64> {
    match t {
        OptimalType::TypeI => Ok(fi_type_i(p)),
        OptimalType::TypeII => fi_type_ii(p),
        OptimalType::TypeIII => fi_type_iii(p),
    }
}

/// Whether the type-`t` measurement exists (real angle, real `s_opt`).
pub fn is_available(p: &StateParams, t: OptimalType) -> bool {
    match t {
        OptimalType::TypeI => true,
        OptimalType::TypeII => cos_chi_type_ii(p).is_ok_and(|c| c.abs() <= 1.0 + BOUNDARY_TOL),
        OptimalType::TypeIII => p.r() > 0.0 && check_type_iii(p).is_ok(),
    }
}

/// Available types and their closed-form FI.
pub fn available_types(p: &StateParams) -> Vec<(OptimalType, f64)> {
    [OptimalType::TypeI, OptimalType::TypeII, OptimalType::TypeIII]
        .into_iter()
        .filter(|&t| is_available(p, t))
        .filter_map(|t| closed_form_fi(p, t).ok().map(|f| (t, f)))
        .collect()
}

/// Measurement realizing the type-`t` optimum at phase `φ`.
pub fn optimal_measurement_spec(p: &StateParams, phi: f64, t: OptimalType) -> Result<MeasurementSpec> {
    if !p.is_canonical(CANONICAL_TOL) {
        return Err(Error::NonCanonical);
    }
    let base = p.theta_s() - 2.0 * phi;
    match t {
        OptimalType::TypeI if p.r() == 0.0 => {
            // homodyne along the displacement-sensitive quadrature
            MeasurementSpec::homodyne(2.0 * (p.theta_c() - phi) - std::f64::consts::PI)
        }
        OptimalType::TypeI => MeasurementSpec::homodyne(base),
        OptimalType::TypeII => {
            let c = cos_chi_type_ii(p)?;
            if c.abs() > 1.0 + BOUNDARY_TOL {
                return Err(Error::NoRealAngle(c));
            }
            MeasurementSpec::homodyne(base - c.clamp(-1.0, 1.0).acos())
        }
        OptimalType::TypeIII => {
            let s = s_opt(p)?;
            if s.is_finite() {
                MeasurementSpec::general_dyne(s, base)
            } else {
                MeasurementSpec::homodyne(base)
            }
        }
    }
}

/// Types whose FI is maximal among the available ones; more than one entry
/// on a region boundary.
pub fn classify_optimal_type(p: &StateParams) -> Vec<OptimalType> {
    if p.r() == 0.0 {
        return vec![OptimalType::TypeI];
    }
    let avail = available_types(p);
    let best = avail.iter().map(|&(_, f)| f).fold(f64::NEG_INFINITY, f64::max);
    avail
        .into_iter()
        .filter(|&(_, f)| best - f <= BOUNDARY_TOL * best.abs().max(1e-300))
        .map(|(t, _)| t)
        .collect()
}

/// `sinh² r` above which a squeezed thermal state beats `4N`.
pub fn sql_threshold(n_th: f64) -> f64 {
    let n = n_th;
    (2.0 * n * n - 2.0 * n - 1.0 + (1.0 + 4.0 * n * (n + 1.0) * (n * n + n + 3.0)).sqrt()) / (4.0 * (2.0 * n + 1.0))
}

/// Squeezing below the vacuum level in some quadrature.
pub fn is_nonclassical_sts(r: f64, n_th: f64) -> bool {
    (-2.0 * r).exp() * (2.0 * n_th + 1.0) < 1.0
}

/// `|α|` at which `∂H/∂n_th` changes sign for canonical phases.
pub fn qfi_turnaround_alpha(r: f64, n_th: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain { value: r, domain: "(0, inf)" });
    }
    let u = 2.0 * n_th + 1.0;
    let rhs = u.powi(3) / (1.0 + 2.0 * n_th * (n_th + 1.0)).powi(2);
    Ok((rhs * (2.0 * r).sinh().powi(2) * (-2.0 * r).exp() / 2.0).sqrt())
}

/// FI of a general-dyne measurement on a displaced thermal state, with
/// `χ = 2(θc − φ) − ψ`.
pub fn dts_fi(alpha_mag: f64, n_th: f64, s: f64, chi: f64) -> f64 {
    let u = 2.0 * n_th + 1.0;
    2.0 * alpha_mag.powi(2) * (u + (2.0 * s).cosh() - chi.cos() * (2.0 * s).sinh())
        / (1.0 + 2.0 * n_th * (n_th + 1.0) + u * (2.0 * s).cosh())
}

/// Large-`s`, `χ = π` limit of [`dts_fi`]; equal to the DTS QFI.
pub fn dts_fi_max(alpha_mag: f64, n_th: f64) -> f64 {
    4.0 * alpha_mag.powi(2) / (2.0 * n_th + 1.0)
}

/// Pure-state (`n_th = 0`) Type-I FI.
pub fn dsvs_fi_type_i(alpha_mag: f64, r: f64) -> f64 {
    4.0 * (2.0 * r).exp() * alpha_mag.powi(2)
}

/// Pure-state (`n_th = 0`) Type-II FI.
pub fn dsvs_fi_type_ii(alpha_mag: f64, r: f64) -> f64 {
    let coth = 1.0 / (2.0 * r).tanh();
    (2.0 * (2.0 * r).sinh() + (1.0 + coth) * alpha_mag.powi(2)).powi(2) / 2.0
}

pub fn dsvs_cos_chi_type_ii(alpha_mag: f64, r: f64) -> f64 {
    1.0 / (2.0 * r).tanh() - 2.0 / ((2.0 * r).exp() * alpha_mag.powi(2) + (4.0 * r).sinh())
}

/// Squeezed thermal state, homodyne at `cos χ = tanh 2r`.
pub fn sts_fi_type_i(r: f64, n_th: f64) -> f64 {
    c_f_type_i(n_th) * (2.0 * r).sinh().powi(2)
}

/// Squeezed thermal state, general-dyne with `s = r`, `cos χ = 1`.
pub fn sts_fi_type_ii(r: f64, n_th: f64) -> f64 {
    c_f_type_ii(n_th) * (2.0 * r).sinh().powi(2)
}

pub fn svs_fi(r: f64) -> f64 {
    2.0 * (2.0 * r).sinh().powi(2)
}
