//! Hermitian operators at most quadratic in `a, a†`, and the linear
//! (Bogoliubov) maps that Gaussian unitaries induce on them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// The map `a ↦ U a U† = λ a + μ a† + ν` of a Gaussian unitary `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bogoliubov {
    pub lambda: C64,
    pub mu: C64,
    pub nu: C64,
}

impl Bogoliubov {
    pub fn identity() -> Self {
        Self { lambda: C64::new(1.0, 0.0), mu: C64::new(0.0, 0.0), nu: C64::new(0.0, 0.0) }
    }

    /// `R(φ) = exp(−iφ a†a)`.
    pub fn rotation(phi: f64) -> Self {
        Self { lambda: C64::from_polar(1.0, phi), ..Self::identity() }
    }

    /// `D(β)`.
    pub fn displacement(beta: C64) -> Self {
        Self { nu: -beta, ..Self::identity() }
    }

    /// `S(ξ) = exp(½(ξ* a² − ξ a†²))`, `ξ = r e^{iθ}`.
    pub fn squeeze(r: f64, theta: f64) -> Self {
        Self {
            lambda: C64::new(r.cosh(), 0.0),
            mu: C64::from_polar(r.sinh(), theta),
            nu: C64::new(0.0, 0.0),
        }
    }

    /// Map of the product `self · inner` (`inner` acts first on kets).
    pub fn then(&self, inner: &Bogoliubov) -> Self {
        let (l1, m1, n1) = (self.lambda, self.mu, self.nu);
        let (l2, m2, n2) = (inner.lambda, inner.mu, inner.nu);
        Self {
            lambda: l2 * l1 + m2 * m1.conj(),
            mu: l2 * m1 + m2 * l1.conj(),
            nu: l2 * n1 + m2 * n1.conj() + n2,
        }
    }

    /// Product of several maps, leftmost outermost.
    pub fn product(maps: &[Bogoliubov]) -> Self {
        maps.iter().fold(Self::identity(), |acc, m| acc.then(m))
    }
}

/// `k0 + kn a†a + (k1 a + h.c.) + (k2 a² + h.c.)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub k0: f64,
    pub kn: f64,
    pub k1: C64,
    pub k2: C64,
}

impl Quadratic {
    pub fn zero() -> Self {
        Self { k0: 0.0, kn: 0.0, k1: C64::new(0.0, 0.0), k2: C64::new(0.0, 0.0) }
    }

    /// `X̂P̂ + P̂X̂ = i(a†² − a²)`.
    pub fn xp_px() -> Self {
        Self { k2: C64::new(0.0, -1.0), ..Self::zero() }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { k0: c * self.k0, kn: c * self.kn, k1: self.k1 * c, k2: self.k2 * c }
    }

    pub fn plus_identity(&self, c: f64) -> Self {
        Self { k0: self.k0 + c, ..*self }
    }

    /// `U Q U†` for the unitary with map `u`.
    pub fn conjugate(&self, u: &Bogoliubov) -> Self {
        let (l, m, n) = (u.lambda, u.mu, u.nu);
        let (k1, k2, kn) = (self.k1, self.k2, self.kn);
        let a2 = k2 * l * l + k2.conj() * m.conj() * m.conj() + kn * l * m.conj();
        let num = 4.0 * (k2 * l * m).re + kn * (l.norm_sqr() + m.norm_sqr());
        let a1 = 2.0 * k2 * l * n
            + 2.0 * k2.conj() * m.conj() * n.conj()
            + kn * (m.conj() * n + n.conj() * l)
            + k1 * l
            + k1.conj() * m.conj();
        let c = k2 * (n * n + l * m)
            + k2.conj() * (n.conj() * n.conj() + l.conj() * m.conj())
            + kn * (m.norm_sqr() + n.norm_sqr())
            + k1 * n
            + k1.conj() * n.conj();
        Self { k0: self.k0 + c.re, kn: num, k1: a1, k2: a2 }
    }

    /// Largest coefficient difference.
    pub fn max_diff(&self, other: &Quadratic) -> f64 {
        [
            (self.k0 - other.k0).abs(),
            (self.kn - other.kn).abs(),
            (self.k1 - other.k1).norm(),
            (self.k2 - other.k2).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `(Q v)_k` on a truncated basis; rows near the edge miss the
    /// contributions of the discarded levels.
    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        let dim = v.len();
        for k in 0..dim {
            let kf = k as f64;
            let mut acc = v[k] * (self.k0 + self.kn * kf);
            if k + 1 < dim {
                acc += self.k1 * (kf + 1.0).sqrt() * v[k + 1];
            }
            if k >= 1 {
                acc += self.k1.conj() * kf.sqrt() * v[k - 1];
            }
            if k + 2 < dim {
                acc += self.k2 * ((kf + 1.0) * (kf + 2.0)).sqrt() * v[k + 2];
            }
            if k >= 2 {
                acc += self.k2.conj() * (kf * (kf - 1.0)).sqrt() * v[k - 2];
            }
            out[k] = acc;
        }
    }

    pub fn apply_columns(&self, v: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(v.nrows(), v.ncols());
        let mut buf = vec![C64::new(0.0, 0.0); v.nrows()];
        for j in 0..v.ncols() {
            let col: Vec<C64> = v.column(j).iter().copied().collect();
            self.apply(&col, &mut buf);
            out.set_column(j, &DVector::from_column_slice(&buf));
        }
        out
    }

    pub fn to_matrix(&self, dim: usize) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let kf = k as f64;
            m[(k, k)] = C64::new(self.k0 + self.kn * kf, 0.0);
            if k + 1 < dim {
                m[(k, k + 1)] = self.k1 * (kf + 1.0).sqrt();
                m[(k + 1, k)] = self.k1.conj() * (kf + 1.0).sqrt();
            }
            if k + 2 < dim {
                let w = ((kf + 1.0) * (kf + 2.0)).sqrt();
                m[(k, k + 2)] = self.k2 * w;
                m[(k + 2, k)] = self.k2.conj() * w;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{displacement_operator, expm, rotation_operator, squeeze_operator};

    fn close(a: &DMatrix<C64>, b: &DMatrix<C64>, block: usize) -> f64 {
        let d = a.view((0, 0), (block, block)) - b.view((0, 0), (block, block));
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn xp_px_matrix_elements() {
        let m = Quadratic::xp_px().to_matrix(6);
        // ⟨2|i(a†² − a²)|0⟩ = i√2
        assert!((m[(2, 0)] - C64::new(0.0, 2f64.sqrt())).norm() < 1e-15);
        assert!((m[(0, 2)] - C64::new(0.0, -(2f64.sqrt()))).norm() < 1e-15);
    }

    #[test]
    fn conjugation_matches_dense_unitaries() {
        let dim = 90;
        let q = Quadratic { k0: 0.3, kn: -0.7, k1: C64::new(0.2, -0.4), k2: C64::new(-0.1, 0.25) };
        let beta = C64::new(0.4, -0.3);
        let maps = [Bogoliubov::rotation(0.6), Bogoliubov::squeeze(0.35, 1.1), Bogoliubov::displacement(beta)];
        let u = rotation_operator(0.6, dim) * squeeze_operator(0.35, 1.1, dim) * displacement_operator(beta, dim);
        let dense = &u * q.to_matrix(dim) * u.adjoint();
        let mapped = q.conjugate(&Bogoliubov::product(&maps)).to_matrix(dim);
        assert!(close(&dense, &mapped, 20) < 1e-10, "{}", close(&dense, &mapped, 20));
        let _ = expm;
    }
}
