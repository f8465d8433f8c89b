//! General-dyne POVM probabilities `Tr[Π_β ρ]` in the number basis.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::spectral::eigen_columns;
use super::{FockOperator, SpectralState};
use crate::error::{Error, Result};
use crate::measurement::MeasurementSpec;

const SEED_DEFICIT: f64 = 1e-10;
const MAX_SEED_ROWS: usize = 20_000;

fn outcome_to_beta(y: &[f64]) -> Result<C64> {
    match y {
        [y1, y2] => Ok(C64::new(*y1, *y2) / std::f64::consts::SQRT_2),
        _ => Err(Error::InvalidParameter(format!("general-dyne outcome must have 2 components, got {}", y.len()))),
    }
}

/// `D(β) S(s e^{iψ}) |0⟩`, `β = (y₁ + i y₂)/√2`, on `rows` levels.
pub fn seed_vector(spec: &MeasurementSpec, y: &[f64], rows: usize) -> Result<DVector<C64>> {
    if spec.is_homodyne() {
        return Err(Error::UnsupportedKind("homodyne"));
    }
    let beta = outcome_to_beta(y)?;
    let v = eigen_columns(beta, spec.s(), spec.psi(), 0.0, rows, 1).column(0).into_owned();
    if 1.0 - v.norm_squared() > SEED_DEFICIT {
        return Err(Error::CutoffExceeded { max: rows });
    }
    Ok(v)
}

/// Seed vector on at least `min_rows` levels, grown until its norm deficit
/// is below `1e-15`.
fn seed_vector_converged(spec: &MeasurementSpec, y: &[f64], min_rows: usize) -> Result<DVector<C64>> {
    let mut rows = min_rows.max(16);
    loop {
        let beta = outcome_to_beta(y)?;
        if spec.is_homodyne() {
            return Err(Error::UnsupportedKind("homodyne"));
        }
        let v = eigen_columns(beta, spec.s(), spec.psi(), 0.0, rows, 1).column(0).into_owned();
        let s = rows - rows.div_ceil(5);
        if v.rows(s, rows - s).norm_squared() < 1e-30 {
            return Ok(v);
        }
        if rows > MAX_SEED_ROWS {
            return Err(Error::CutoffExceeded { max: MAX_SEED_ROWS });
        }
        rows = (rows as f64 * 1.25).ceil() as usize;
    }
}

/// `(1/π) ⟨β, s e^{iψ}| ρ |β, s e^{iψ}⟩`, a density in `β`. The density
/// in the quadrature outcome `y = √2(Re β, Im β)` is half of this.
pub fn povm_probability(rho: &FockOperator, spec: &MeasurementSpec, y: &[f64]) -> Result<f64> {
    let v = seed_vector(spec, y, rho.cutoff)?;
    let value = v.dotc(&(&rho.matrix * &v)).re / std::f64::consts::PI;
    Ok(value.max(0.0))
}

impl SpectralState {
    /// Same as [`povm_probability`] without forming the dense matrix. The
    /// seed is resolved on as many levels as it needs; the state is taken
    /// as zero beyond its cutoff.
    pub fn povm_probability(&self, spec: &MeasurementSpec, y: &[f64]) -> Result<f64> {
        let v = seed_vector_converged(spec, y, self.cutoff())?;
        let overlaps = self.vectors.ad_mul(&v.rows(0, self.cutoff()));
        let value: f64 = self.weights.iter().zip(overlaps.iter()).map(|(w, z)| w * z.norm_sqr()).sum();
        Ok(value / std::f64::consts::PI)
    }
}
