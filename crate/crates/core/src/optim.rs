//! Derivative-free maximization: golden-section search and Nelder–Mead.

const INV_PHI: f64 = 0.618_033_988_749_894_9; // 1/φ

/// Maximize a unimodal `f` on `[a, b]` until the bracket is narrower than `xtol`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Stop when the spread of function values over the simplex drops below this.
    pub ftol: f64,
    /// Stop when the simplex diameter drops below this.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { ftol: 1e-13, xtol: 1e-11, max_iter: 5000 }
    }
}

impl NelderMead {
    /// Maximize `f` starting from `x0` with initial steps `step`.
    /// Returns `(argmax, max)`.
    pub fn maximize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64], step: &[f64]) -> (Vec<f64>, f64) {
        let n = x0.len();
        let mut g = |x: &[f64]| -f(x);
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), g(x0)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += step[i];
            let v = g(&x);
            simplex.push((x, v));
        }
        for _ in 0..self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (best, worst) = (simplex[0].1, simplex[n].1);
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if (worst - best).abs() <= self.ftol * best.abs().max(1.0) && diameter <= self.xtol {
                break;
            }
            let centroid: Vec<f64> =
                (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (w - c)).collect()
            };
            let xr = along(-1.0);
            let fr = g(&xr);
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = g(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = along(-0.5);
                    let fc = g(&xc);
                    (xc, fc)
                } else {
                    let xc = along(0.5);
                    let fc = g(&xc);
                    (xc, fc)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for (x, v) in simplex.iter_mut().skip(1) {
                        for (xi, bi) in x.iter_mut().zip(&x_best) {
                            *xi = bi + 0.5 * (*xi - bi);
                        }
                        *v = g(x);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, v) = simplex.swap_remove(0);
        (x, -v)
    }
}
