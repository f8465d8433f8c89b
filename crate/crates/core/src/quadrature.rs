//! Adaptive Gauss–Kronrod (7/15) quadrature in one and two dimensions.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 4000;

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// `∫_a^b f` to absolute tolerance `tol`, bisecting the interval with the
/// largest error estimate until the summed estimate meets `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (value, err) = gk15(&mut f, a, b);
    let mut pieces = vec![Piece { a, b, value, err }];
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.err).sum();
        if total_err <= tol {
            break;
        }
        let (i, worst) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("nonempty");
        let (a, b) = (worst.a, worst.b);
        let m = 0.5 * (a + b);
        if pieces.len() >= MAX_INTERVALS || m <= a || m >= b {
            return Err(Error::NumericFailure(format!(
                "quadrature did not converge on [{a}, {b}] (error estimate {total_err:.3e})"
            )));
        }
        let (lv, le) = gk15(&mut f, a, m);
        let (rv, re) = gk15(&mut f, m, b);
        pieces[i] = Piece { a, b: m, value: lv, err: le };
        pieces.push(Piece { a: m, b, value: rv, err: re });
    }
    Ok(pieces.iter().map(|p| p.value).sum())
}

/// `∫∫ f(x, y)` over a rectangle, as nested 1-D adaptive rules.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    tol: f64,
) -> Result<f64> {
    let inner_tol = tol / (x1 - x0).abs().max(1.0);
    let mut failure = None;
    let outer = integrate(
        |x| match integrate(|y| f(x, y), y0, y1, inner_tol) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        x0,
        x1,
        tol,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(outer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(v, 9.0 - 1.5 + 6.0, epsilon = 1e-13);
    }

    #[test]
    fn gaussian_mass() {
        let v = integrate(|x| (-0.5 * x * x).exp() / (2.0 * PI).sqrt(), -8.0, 8.0, 1e-13).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_dimensional() {
        let v = integrate_2d(|x, y| (-(x * x + y * y)).exp(), (-7.0, 7.0), (-7.0, 7.0), 1e-12).unwrap();
        assert_relative_eq!(v, PI, epsilon = 1e-10);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let r = integrate(|x| if x > 0.3 { 1.0 / (x - 0.3).sqrt() } else { 0.0 }, 0.0, 1.0, 1e-300);
        assert!(matches!(r, Err(Error::NumericFailure(_))));
    }
}
