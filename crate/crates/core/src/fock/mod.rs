//! Truncated Fock-space oracles: density matrices, SLD operators and POVM
//! probabilities built from number-basis amplitudes, independent of the
//! moment formulas in [`crate::fisher`].
//!
//! The heavy lifting works on the spectral decomposition
//! `ρ = Σ p_n |χ_n⟩⟨χ_n|`, `χ_n = R(φ)D(α)S(ξ)|n⟩`, so that traces and
//! trace norms cost `O(cutoff · rank²)` instead of dense cubic products.

mod crosscheck;
mod povm;
mod quadratic;
mod sld;
mod spectral;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crosscheck::{sld_route_consistency, svs_homodyne_optimality_check, SldRouteReport, HomodyneOptimalityReport};
pub use povm::{povm_probability, seed_vector};
pub use quadratic::{Bogoliubov, Quadratic};
pub use sld::{
    qfi_from_sld, sld_closed_form, sld_closed_form_quadratic, sld_quadratic_decomposition, sld_spectral,
    QuadraticDecomposition,
};
pub use spectral::{
    build_density_matrix, convergence_certificate, eigen_columns, sld_diagnostics, thermal_weight, Certificate,
    SldDiagnostics, SpectralState,
};

/// A complex matrix on the basis `|0⟩ … |cutoff−1⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub matrix: DMatrix<C64>,
    pub cutoff: usize,
}

impl FockOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidParameter(format!(
                "Fock operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let cutoff = matrix.nrows();
        Ok(Self { matrix, cutoff })
    }

    pub fn zeros(cutoff: usize) -> Self {
        Self { matrix: DMatrix::zeros(cutoff, cutoff), cutoff }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest entry of `M − M†`.
    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Leading `k × k` block, used to stay clear of truncation edges.
    pub fn block(&self, k: usize) -> DMatrix<C64> {
        let k = k.min(self.cutoff);
        self.matrix.view((0, 0), (k, k)).into_owned()
    }

    /// Size of the block that excludes the last `⌈cutoff/5⌉` levels.
    pub fn safe_dim(&self) -> usize {
        safe_dim(self.cutoff)
    }
}

pub(crate) fn safe_dim(cutoff: usize) -> usize {
    cutoff - cutoff.div_ceil(5)
}

/// How far the truncated basis must extend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffPolicy {
    pub target_trace_deficit: f64,
    pub max_cutoff: usize,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self { target_trace_deficit: 1e-10, max_cutoff: 400 }
    }
}

impl CutoffPolicy {
    pub fn new(target_trace_deficit: f64, max_cutoff: usize) -> Result<Self> {
        if !(target_trace_deficit > 0.0 && target_trace_deficit < 1.0) {
            return Err(Error::Domain { value: target_trace_deficit, domain: "(0, 1)" });
        }
        if max_cutoff < 2 {
            return Err(Error::InvalidParameter(format!("max_cutoff must be at least 2, got {max_cutoff}")));
        }
        Ok(Self { target_trace_deficit, max_cutoff })
    }
}

/// Truncated ladder and quadrature operators.
#[derive(Debug, Clone)]
pub struct LadderOperators {
    pub a: FockOperator,
    pub a_dag: FockOperator,
    pub x: FockOperator,
    pub p: FockOperator,
    pub n: FockOperator,
}

pub fn build_operators(cutoff: usize) -> Result<LadderOperators> {
    if cutoff < 2 {
        return Err(Error::InvalidParameter(format!("cutoff must be at least 2, got {cutoff}")));
    }
    let a = annihilation(cutoff);
    let a_dag = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&a + &a_dag) * C64::new(s, 0.0);
    let p = (&a - &a_dag) * C64::new(0.0, -s);
    let n = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(cutoff, |k, _| C64::new(k as f64, 0.0)));
    let wrap = |matrix| FockOperator { matrix, cutoff };
    Ok(LadderOperators { a: wrap(a), a_dag: wrap(a_dag), x: wrap(x), p: wrap(p), n: wrap(n) })
}

fn annihilation(dim: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(m: &DMatrix<C64>) -> DMatrix<C64> {
    let dim = m.nrows();
    let norm: f64 = (0..dim)
        .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let scaled = m / C64::new(2f64.powi(squarings as i32), 0.0);
    let mut result = DMatrix::<C64>::identity(dim, dim);
    let mut term = DMatrix::<C64>::identity(dim, dim);
    for k in 1..40 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        result += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `D(β) = exp(β a† − β* a)` on the truncated space.
pub fn displacement_operator(beta: C64, dim: usize) -> DMatrix<C64> {
    let a = annihilation(dim);
    expm(&(a.adjoint() * beta - a * beta.conj()))
}

/// `S(ξ) = exp(½(ξ* a² − ξ a†²))`, `ξ = r e^{iθ}`.
pub fn squeeze_operator(r: f64, theta: f64, dim: usize) -> DMatrix<C64> {
    let a = annihilation(dim);
    let xi = C64::from_polar(r, theta);
    let a2 = &a * &a;
    expm(&((&a2 * xi.conj() - a2.adjoint() * xi) * C64::new(0.5, 0.0)))
}

/// `R(φ) = exp(−iφ a†a)`.
pub fn rotation_operator(phi: f64, dim: usize) -> DMatrix<C64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |k, _| C64::from_polar(1.0, -phi * k as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn ladder_elements() {
        let ops = build_operators(8).unwrap();
        assert_eq!(ops.a_dag.matrix[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(ops.a.matrix[(2, 3)], C64::new(3f64.sqrt(), 0.0));
    }

    #[test]
    fn canonical_commutator_on_safe_block() {
        let ops = build_operators(30).unwrap();
        let (x, p) = (&ops.x.matrix, &ops.p.matrix);
        let comm = x * p - p * x;
        let k = 29;
        let d = comm.view((0, 0), (k, k)) - DMatrix::<C64>::identity(k, k) * C64::new(0.0, 1.0);
        assert!(max_abs(&d.into_owned()) < 1e-13);
    }

    #[test]
    fn number_from_quadratures() {
        let ops = build_operators(20).unwrap();
        let (x, p, n) = (&ops.x.matrix, &ops.p.matrix, &ops.n.matrix);
        let lhs = x * x + p * p;
        let rhs = n * C64::new(2.0, 0.0) + DMatrix::<C64>::identity(20, 20);
        let d = lhs.view((0, 0), (19, 19)) - rhs.view((0, 0), (19, 19));
        assert!(max_abs(&d.into_owned()) < 1e-13);
    }

    #[test]
    fn coherent_amplitudes_from_expm() {
        let beta = C64::new(0.6, -0.2);
        let d = displacement_operator(beta, 60);
        for k in 0..10u32 {
            let fact: f64 = (1..=k).map(f64::from).product();
            let want = (-0.5 * beta.norm_sqr()).exp() * beta.powu(k) / fact.sqrt();
            assert!((d[(k as usize, 0)] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn squeezed_vacuum_amplitudes() {
        let (r, th) = (0.5f64, 0.9f64);
        let s = squeeze_operator(r, th, 80);
        assert!((s[(0, 0)].re - 1.0 / r.cosh().sqrt()).abs() < 1e-13);
        let want = -C64::from_polar(r.tanh(), th) * (0.5f64.sqrt() / r.cosh().sqrt());
        assert!((s[(2, 0)] - want).norm() < 1e-13);
    }

    #[test]
    fn policy_validation() {
        assert!(CutoffPolicy::new(0.0, 10).is_err());
        assert!(CutoffPolicy::new(1e-8, 1).is_err());
        assert_eq!(CutoffPolicy::default(), CutoffPolicy::new(1e-10, 400).unwrap());
    }
}
