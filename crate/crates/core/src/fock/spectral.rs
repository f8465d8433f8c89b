//! Spectral representation of the probe state and low-rank SLD diagnostics.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{safe_dim, sld::sld_closed_form_quadratic, CutoffPolicy, FockOperator, Quadratic};
use crate::error::{Error, Result};
use crate::state::{GaussianMoments, StateParams};

const I: C64 = C64::new(0.0, 1.0);
const EDGE_MASS_TOL: f64 = 1e-16;

/// `p_n = n_th^n / (1+n_th)^{n+1}`.
pub fn thermal_weight(n_th: f64, n: usize) -> f64 {
    if n_th == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let q = n_th / (1.0 + n_th);
    q.powi(n as i32) / (1.0 + n_th)
}

/// Number-basis amplitudes of `R(φ)D(α)S(ξ)|n⟩` for `n < count`, on `rows`
/// levels. Built from the ladder relation `B χ_n = √n χ_{n−1}` with
/// `B = (DS) a (DS)†`, then re-orthogonalized against lower columns: the raw
/// recurrence amplifies components along lower eigenvectors combinatorially.
pub fn eigen_columns(alpha: C64, r: f64, theta_s: f64, phi: f64, rows: usize, count: usize) -> DMatrix<C64> {
    let (c, s) = (r.cosh(), r.sinh());
    let e = C64::from_polar(1.0, theta_s);
    let es = e * s;

    // first row, ⟨0|DS|n⟩
    let mut first = vec![C64::new(0.0, 0.0); count];
    let psi00 = (-0.5 * alpha.norm_sqr() - 0.5 * alpha.conj() * alpha.conj() * e * r.tanh()).exp() / c.sqrt();
    first[0] = psi00.conj();
    for n in 0..count.saturating_sub(1) {
        let prev = if n > 0 { first[n - 1] } else { C64::new(0.0, 0.0) };
        first[n + 1] = (es * (n as f64).sqrt() * prev - alpha * first[n]) / (c * ((n + 1) as f64).sqrt());
    }
    let first: Vec<C64> = first.into_iter().map(|z| z.conj()).collect();

    let beta = alpha * c + es * alpha.conj();
    let sq: Vec<f64> = (0..=rows).map(|k| (k as f64).sqrt()).collect();
    let mut v = DMatrix::<C64>::zeros(rows, count);
    let mut x = DVector::<C64>::zeros(rows);
    for n in 0..count {
        x[0] = first[n];
        for k in 0..rows - 1 {
            let mut acc = beta * x[k];
            if n > 0 {
                acc += sq[n] * v[(k, n - 1)];
            }
            if k > 0 {
                acc -= es * sq[k] * x[k - 1];
            }
            x[k + 1] = acc / (c * sq[k + 1]);
        }
        if n > 0 {
            for _ in 0..2 {
                let q = v.columns(0, n);
                let coef = q.ad_mul(&x);
                x -= q * coef;
            }
        }
        v.set_column(n, &x);
    }
    for k in 0..rows {
        let ph = C64::from_polar(1.0, -phi * k as f64);
        v.row_mut(k).iter_mut().for_each(|z| *z *= ph);
    }
    v
}

/// `ρ_φ = Σ p_n |χ_n⟩⟨χ_n|` on a truncated basis.
#[derive(Debug, Clone)]
pub struct SpectralState {
    pub params: StateParams,
    pub phi: f64,
    pub weights: Vec<f64>,
    /// Columns are the eigenvectors `χ_n`.
    pub vectors: DMatrix<C64>,
}

fn rank_for(n_th: f64, deficit: f64) -> usize {
    if n_th == 0.0 {
        return 1;
    }
    // thermal tail Σ_{n≥K} p_n = q^K
    let q = n_th / (1.0 + n_th);
    let k = ((0.1 * deficit).ln() / q.ln()).ceil().max(1.0) as usize;
    k + 2
}

impl SpectralState {
    /// Smallest cutoff (grown geometrically) meeting the policy.
    pub fn build(p: &StateParams, phi: f64, policy: &CutoffPolicy) -> Result<Self> {
        let count = rank_for(p.n_th(), policy.target_trace_deficit);
        let spread = (2.0 * p.r()).cosh() * (count as f64 + 0.5) + p.alpha_mag().powi(2) * (2.0 * p.r()).exp();
        let mut rows = ((1.5 * spread).ceil() as usize + 16).max(16);
        loop {
            if rows > policy.max_cutoff {
                return Err(Error::CutoffExceeded { max: policy.max_cutoff });
            }
            let st = Self::with_cutoff(p, phi, rows, count);
            if st.trace_deficit() < policy.target_trace_deficit && st.edge_weight() < policy.target_trace_deficit {
                return Ok(st);
            }
            let next = (rows as f64 * 1.25).ceil() as usize;
            rows = if rows < policy.max_cutoff { next.min(policy.max_cutoff) } else { next };
        }
    }

    pub fn with_cutoff(p: &StateParams, phi: f64, rows: usize, count: usize) -> Self {
        let count = count.min(rows);
        let weights = (0..count).map(|n| thermal_weight(p.n_th(), n)).collect();
        let vectors = eigen_columns(p.alpha(), p.r(), p.theta_s(), phi, rows, count);
        Self { params: *p, phi, weights, vectors }
    }

    pub fn cutoff(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn is_pure(&self) -> bool {
        self.params.n_th() == 0.0
    }

    pub fn trace(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, w)| w * self.vectors.column(n).norm_squared())
            .sum()
    }

    pub fn trace_deficit(&self) -> f64 {
        (1.0 - self.trace()).max(0.0)
    }

    /// Weight carried by the excluded edge levels.
    pub fn edge_weight(&self) -> f64 {
        let s = safe_dim(self.cutoff());
        let tail = self.cutoff() - s;
        self.weights
            .iter()
            .enumerate()
            .map(|(n, w)| w * self.vectors.view((s, n), (tail, 1)).norm_squared())
            .sum()
    }

    /// Leading eigenvectors whose mass on the excluded edge levels is
    /// below `EDGE_MASS_TOL`.
    pub fn converged_rank(&self) -> usize {
        let s = safe_dim(self.cutoff());
        let tail = self.cutoff() - s;
        (0..self.rank())
            .take_while(|&n| self.vectors.view((s, n), (tail, 1)).norm_squared() < EDGE_MASS_TOL)
            .count()
    }

    fn weight_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_iterator(self.rank(), self.weights.iter().map(|&w| C64::new(w, 0.0))))
    }

    pub fn density_matrix(&self) -> FockOperator {
        let v = &self.vectors;
        let matrix = v * self.weight_matrix() * v.adjoint();
        FockOperator { cutoff: self.cutoff(), matrix }
    }

    /// `Tr[ρ Q]`.
    pub fn expectation(&self, q: &Quadratic) -> f64 {
        let qv = q.apply_columns(&self.vectors);
        self.weights
            .iter()
            .enumerate()
            .map(|(n, w)| w * self.vectors.column(n).dotc(&qv.column(n)).re)
            .sum()
    }

    fn complex_expectation(&self, f: impl Fn(&[C64], usize) -> C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (n, w) in self.weights.iter().enumerate() {
            let col: Vec<C64> = self.vectors.column(n).iter().copied().collect();
            let mut s = C64::new(0.0, 0.0);
            for k in 0..col.len() {
                s += col[k].conj() * f(&col, k);
            }
            acc += s * *w;
        }
        acc
    }

    /// First and second moments of the truncated state.
    pub fn moments(&self) -> GaussianMoments {
        let a = self.complex_expectation(|v, k| if k + 1 < v.len() { v[k + 1] * ((k + 1) as f64).sqrt() } else { C64::new(0.0, 0.0) });
        let a2 = self.complex_expectation(|v, k| {
            if k + 2 < v.len() {
                v[k + 2] * (((k + 1) * (k + 2)) as f64).sqrt()
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let n = self.complex_expectation(|v, k| v[k] * k as f64).re;
        let s2 = std::f64::consts::SQRT_2;
        let d = Vector2::new(s2 * a.re, s2 * a.im);
        let xx = a2.re + n + 0.5 - d[0] * d[0];
        let pp = -a2.re + n + 0.5 - d[1] * d[1];
        let xp = a2.im - d[0] * d[1];
        GaussianMoments::new(Matrix2::new(xx, xp, xp, pp), d)
    }

    /// `(N V)` with `N = a†a`.
    fn number_columns(&self) -> DMatrix<C64> {
        let mut nv = self.vectors.clone();
        for k in 0..nv.nrows() {
            nv.row_mut(k).iter_mut().for_each(|z| *z *= k as f64);
        }
        nv
    }

    /// Eigenbasis matrix of the spectral SLD,
    /// `L'_{mn} = −2i (p_n − p_m)/(p_n + p_m) ⟨χ_m|N|χ_n⟩`.
    pub fn spectral_sld_eigenbasis(&self) -> DMatrix<C64> {
        let g = self.vectors.ad_mul(&self.number_columns());
        let k = self.rank();
        DMatrix::from_fn(k, k, |m, n| {
            let (pm, pn) = (self.weights[m], self.weights[n]);
            if pm + pn < 1e-300 {
                C64::new(0.0, 0.0)
            } else {
                -2.0 * I * (pn - pm) / (pn + pm) * g[(m, n)]
            }
        })
    }

    /// `L V` for the spectral SLD (`2∂ρ` for pure states).
    fn spectral_sld_columns(&self) -> DMatrix<C64> {
        let v = &self.vectors;
        if self.is_pure() {
            // L = −2i(Nρ − ρN), ρ = ψψ†
            let nv = self.number_columns();
            let psi = v.column(0);
            let npsi = nv.column(0);
            let overlap = psi.dotc(&npsi); // ⟨ψ|N|ψ⟩
            let norm = psi.norm_squared();
            let col = (npsi * C64::new(norm, 0.0) - psi * overlap) * (-2.0 * I);
            return DMatrix::from_columns(&[col]);
        }
        v * self.spectral_sld_eigenbasis()
    }

    /// Trace norm of `∂_φρ − ½(Lρ + ρL)` on the safe block, given `L V`.
    fn residual(&self, lv: &DMatrix<C64>) -> Result<f64> {
        let k = self.rank();
        let p = self.weight_matrix();
        let w = {
            let mut w = DMatrix::<C64>::zeros(self.cutoff(), 3 * k);
            w.columns_mut(0, k).copy_from(&self.vectors);
            w.columns_mut(k, k).copy_from(&self.number_columns());
            w.columns_mut(2 * k, k).copy_from(lv);
            w
        };
        let mut m = DMatrix::<C64>::zeros(3 * k, 3 * k);
        m.view_mut((k, 0), (k, k)).copy_from(&(&p * -I));
        m.view_mut((0, k), (k, k)).copy_from(&(&p * I));
        m.view_mut((2 * k, 0), (k, k)).copy_from(&(&p * C64::new(-0.5, 0.0)));
        m.view_mut((0, 2 * k), (k, k)).copy_from(&(&p * C64::new(-0.5, 0.0)));
        trace_norm_low_rank(&w.rows(0, safe_dim(self.cutoff())).into_owned(), &m)
    }

    /// `Σ p_n ‖L χ_n‖²`, rows adjacent to the edge excluded.
    fn qfi_from_columns(&self, lv: &DMatrix<C64>) -> f64 {
        let rows = self.cutoff() - 2;
        self.weights
            .iter()
            .enumerate()
            .map(|(n, w)| w * lv.view((0, n), (rows, 1)).norm_squared())
            .sum()
    }
}

/// `Σ |λ_i|` of `W M W†`, with `W = QR`.
fn trace_norm_low_rank(w: &DMatrix<C64>, m: &DMatrix<C64>) -> Result<f64> {
    let r = w.clone().qr().r();
    let core = &r * m * r.adjoint();
    let herm = (&core + core.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm
        .try_symmetric_eigen(1e-15, 10_000)
        .ok_or_else(|| Error::NumericFailure("eigen-decomposition did not converge".into()))?;
    Ok(eig.eigenvalues.iter().map(|x| x.abs()).sum())
}

/// `ρ_φ` as a dense matrix, with the cutoff chosen per `policy`.
pub fn build_density_matrix(p: &StateParams, phi: f64, policy: &CutoffPolicy) -> Result<FockOperator> {
    Ok(SpectralState::build(p, phi, policy)?.density_matrix())
}

/// Scalar checks of both SLD constructions against one spectral state.
#[derive(Debug, Clone, Serialize)]
pub struct SldDiagnostics {
    pub cutoff: usize,
    pub rank: usize,
    pub trace_deficit: f64,
    /// `Tr[ρL²]` for the closed-form SLD.
    pub qfi_closed: f64,
    pub qfi_spectral: f64,
    /// `Tr[ρL]`; zero for a valid SLD.
    pub mean_closed: f64,
    pub mean_spectral: f64,
    /// Trace norm of the defining-equation residual on the safe block.
    pub residual_closed: f64,
    pub residual_spectral: f64,
    /// Operator-norm distance of the two SLDs on the span of the converged
    /// eigenvectors; `None` for pure states, where the SLD is not unique.
    pub spectral_vs_closed: Option<f64>,
    /// Number of leading eigenvectors with negligible edge mass.
    pub converged_rank: usize,
}

pub fn sld_diagnostics(p: &StateParams, phi: f64, policy: &CutoffPolicy) -> Result<SldDiagnostics> {
    let st = SpectralState::build(p, phi, policy)?;
    diagnostics_for(&st)
}

fn mean(st: &SpectralState, lv: &DMatrix<C64>) -> f64 {
    st.weights
        .iter()
        .enumerate()
        .map(|(n, w)| w * st.vectors.column(n).dotc(&lv.column(n)).re)
        .sum()
}

fn diagnostics_for(st: &SpectralState) -> Result<SldDiagnostics> {
    let q = sld_closed_form_quadratic(&st.params, st.phi);
    let lv_closed = q.apply_columns(&st.vectors);
    let lv_spec = st.spectral_sld_columns();
    let kc = st.converged_rank();
    let spectral_vs_closed = if st.is_pure() || kc == 0 {
        None
    } else {
        let v = st.vectors.columns(0, kc);
        let block = v.ad_mul(&lv_closed.columns(0, kc));
        let diff = block - st.spectral_sld_eigenbasis().view((0, 0), (kc, kc));
        let herm = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
        let eig = herm
            .try_symmetric_eigen(1e-15, 10_000)
            .ok_or_else(|| Error::NumericFailure("eigen-decomposition did not converge".into()))?;
        Some(eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max))
    };
    Ok(SldDiagnostics {
        cutoff: st.cutoff(),
        rank: st.rank(),
        trace_deficit: st.trace_deficit(),
        qfi_closed: st.qfi_from_columns(&lv_closed),
        qfi_spectral: st.qfi_from_columns(&lv_spec),
        mean_closed: mean(st, &lv_closed),
        mean_spectral: mean(st, &lv_spec),
        residual_closed: st.residual(&lv_closed)?,
        residual_spectral: st.residual(&lv_spec)?,
        spectral_vs_closed,
        converged_rank: kc,
    })
}

/// Change of the reported scalars when the cutoff grows by 25%.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub cutoff: usize,
    pub enlarged_cutoff: usize,
    pub max_change: f64,
}

pub fn convergence_certificate(p: &StateParams, phi: f64, policy: &CutoffPolicy) -> Result<Certificate> {
    let base = SpectralState::build(p, phi, policy)?;
    let enlarged_cutoff = (base.cutoff() as f64 * 1.25).ceil() as usize;
    let big = SpectralState::with_cutoff(p, phi, enlarged_cutoff, base.rank());
    let scalars = |st: &SpectralState| -> Result<Vec<f64>> {
        let d = diagnostics_for(st)?;
        let m = st.moments();
        Ok(vec![
            d.qfi_closed,
            d.qfi_spectral,
            st.trace(),
            m.sigma[(0, 0)],
            m.sigma[(0, 1)],
            m.sigma[(1, 1)],
            m.d[0],
            m.d[1],
        ])
    };
    let (a, b) = (scalars(&base)?, scalars(&big)?);
    let max_change = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(Certificate { cutoff: base.cutoff(), enlarged_cutoff, max_change })
}
