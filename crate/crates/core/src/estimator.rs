//! Monte-Carlo phase estimation: sample records, maximize the likelihood,
//! compare the mean-squared error with the Cramér-Rao bound.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fisher::gaussian_fi_moments;
use crate::measurement::{outcome_distribution, stream_rng, MeasurementSpec, OutcomeDistribution};
use crate::optim::golden_section_max;
use crate::state::{apply_thermal_channel, phase_shifted_moments, ChannelParams, StateParams};

const GRID_POINTS: usize = 200;
const REFINE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub state: StateParams,
    pub channel: ChannelParams,
    pub phi_true: f64,
    pub spec: MeasurementSpec,
    /// Samples per trial, `M`.
    pub shots: usize,
    pub trials: usize,
    pub seed: u64,
    /// Estimates are sought in `φ_true ± search_halfwidth`.
    pub search_halfwidth: f64,
}

impl ExperimentConfig {
    pub const DEFAULT_HALFWIDTH: f64 = 0.5;

    pub fn new(state: StateParams, spec: MeasurementSpec, phi_true: f64, shots: usize, trials: usize, seed: u64) -> Self {
        Self {
            state,
            channel: ChannelParams::identity(),
            phi_true,
            spec,
            shots,
            trials,
            seed,
            search_halfwidth: Self::DEFAULT_HALFWIDTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 || self.trials == 0 {
            return Err(Error::InvalidParameter("shots and trials must be >= 1".into()));
        }
        if !(self.search_halfwidth > 0.0 && self.search_halfwidth <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::Domain { value: self.search_halfwidth, domain: "(0, pi/2]" });
        }
        if !self.phi_true.is_finite() {
            return Err(Error::InvalidParameter("phi_true must be finite".into()));
        }
        Ok(())
    }

    /// Outcome law at phase `phi` after the channel.
    pub fn distribution(&self, phi: f64) -> Result<OutcomeDistribution> {
        outcome_law(&self.state, &self.channel, &self.spec, phi)
    }
}

fn outcome_law(state: &StateParams, channel: &ChannelParams, spec: &MeasurementSpec, phi: f64) -> Result<OutcomeDistribution> {
    let lossy = apply_thermal_channel(state, channel);
    outcome_distribution(&phase_shifted_moments(&lossy, phi), spec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationReport {
    pub mse: f64,
    pub bias: f64,
    /// `1/(M F)`.
    pub cr_bound: f64,
    /// `M F · mse`.
    pub saturation_ratio: f64,
    pub fi_used: f64,
    /// Standard error of `mse` across trials.
    pub mse_std_error: f64,
    /// Trials whose estimate sat on the edge of the search window.
    pub boundary_hits: usize,
    pub shots: usize,
    pub trials: usize,
    pub estimates: Vec<f64>,
}

/// `Σ_i log p(y_i | φ)`. `outcomes` holds one record per entry.
pub fn log_likelihood(
    outcomes: &[Vec<f64>],
    phi: f64,
    state: &StateParams,
    channel: &ChannelParams,
    spec: &MeasurementSpec,
) -> Result<f64> {
    let dist = outcome_law(state, channel, spec, phi)?;
    outcomes.iter().map(|y| dist.log_density(y)).sum()
}

/// Count, mean and scatter matrix of a set of records: all a Gaussian
/// likelihood needs.
#[derive(Debug, Clone)]
pub(crate) struct SampleStats {
    count: f64,
    mean: DVector<f64>,
    scatter: DMatrix<f64>,
}

impl SampleStats {
    pub(crate) fn from_flat(flat: &[f64], dim: usize) -> Self {
        let n = flat.len() / dim;
        let mut mean = DVector::zeros(dim);
        for y in flat.chunks(dim) {
            for i in 0..dim {
                mean[i] += y[i];
            }
        }
        mean /= n as f64;
        let mut scatter = DMatrix::zeros(dim, dim);
        for y in flat.chunks(dim) {
            for i in 0..dim {
                for j in 0..dim {
                    scatter[(i, j)] += (y[i] - mean[i]) * (y[j] - mean[j]);
                }
            }
        }
        Self { count: n as f64, mean, scatter }
    }

    fn log_likelihood(&self, dist: &OutcomeDistribution) -> Result<f64> {
        let k = dist.dim();
        let chol = dist.cov.clone().cholesky().ok_or(Error::IllConditioned(f64::INFINITY))?;
        let diff = &self.mean - &dist.mean;
        let s = &self.scatter + &diff * diff.transpose() * self.count;
        let quad = chol.inverse().component_mul(&s).sum();
        let log_det: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
        Ok(-0.5 * (quad + self.count * (log_det + k as f64 * (2.0 * std::f64::consts::PI).ln())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MlEstimate {
    pub phi: f64,
    pub boundary_hit: bool,
}

fn maximize<F: Fn(f64) -> Result<OutcomeDistribution>>(
    stats: &SampleStats,
    law: F,
    center: f64,
    halfwidth: f64,
) -> Result<MlEstimate> {
    let ll = |phi: f64| -> f64 { law(phi).and_then(|d| stats.log_likelihood(&d)).unwrap_or(f64::NEG_INFINITY) };
    let (lo, hi) = (center - halfwidth, center + halfwidth);
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let (best, best_val) = (0..GRID_POINTS)
        .map(|i| (i, ll(lo + step * i as f64)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    if !best_val.is_finite() {
        return Err(Error::NumericFailure("likelihood is not finite anywhere in the search window".into()));
    }
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = (lo + step * (best + 1) as f64).min(hi);
    let (phi, _) = golden_section_max(ll, a, b, REFINE_TOL);
    let boundary_hit = best == 0 || best == GRID_POINTS - 1;
    Ok(MlEstimate { phi, boundary_hit })
}

/// Maximum-likelihood phase within `φ_true ± search_halfwidth`: 200-point
/// grid, then golden-section refinement to `1e-9`.
pub fn ml_estimate(outcomes: &[Vec<f64>], config: &ExperimentConfig) -> Result<MlEstimate> {
    config.validate()?;
    let dim = config.spec.outcome_dim();
    if outcomes.is_empty() || outcomes.iter().any(|y| y.len() != dim) {
        return Err(Error::InvalidParameter(format!("outcomes must be non-empty records of length {dim}")));
    }
    let flat: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let stats = SampleStats::from_flat(&flat, dim);
    maximize(&stats, |phi| config.distribution(phi), config.phi_true, config.search_halfwidth)
}

/// Runs `trials` independent experiments of `shots` samples each. Trial `t`
/// draws from RNG stream `(seed, t)`, so the report does not depend on
/// scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EstimationReport> {
    config.validate()?;
    let truth = config.distribution(config.phi_true)?;
    let lossy = apply_thermal_channel(&config.state, &config.channel);
    let fi = gaussian_fi_moments(&phase_shifted_moments(&lossy, config.phi_true), &config.spec)?;
    let dim = truth.dim();

    let results: Vec<Result<MlEstimate>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut flat = Vec::with_capacity(config.shots * dim);
            truth.sample_into(&mut stream_rng(config.seed, t as u64), config.shots, &mut flat);
            let stats = SampleStats::from_flat(&flat, dim);
            maximize(&stats, |phi| config.distribution(phi), config.phi_true, config.search_halfwidth)
        })
        .collect();

    let mut estimates = Vec::with_capacity(config.trials);
    let mut boundary_hits = 0;
    for r in results {
        let e = r?;
        boundary_hits += usize::from(e.boundary_hit);
        estimates.push(e.phi);
    }
    let n = config.trials as f64;
    let errors: Vec<f64> = estimates.iter().map(|e| e - config.phi_true).collect();
    let bias = errors.iter().sum::<f64>() / n;
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / n;
    let mse_std_error = if config.trials > 1 {
        let var = errors.iter().map(|e| (e * e - mse).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        f64::NAN
    };
    let m = config.shots as f64;
    Ok(EstimationReport {
        mse,
        bias,
        cr_bound: 1.0 / (m * fi),
        saturation_ratio: m * fi * mse,
        fi_used: fi,
        mse_std_error,
        boundary_hits,
        shots: config.shots,
        trials: config.trials,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::{optimal_measurement_spec, OptimalType};
    use crate::measurement::sample_outcomes;

    fn coherent_config(shots: usize, trials: usize, seed: u64) -> ExperimentConfig {
        let p = StateParams::canonical(1.0, 0.0, 0.0, 0.0).unwrap();
        let spec = optimal_measurement_spec(&p, 0.3, OptimalType::TypeI).unwrap();
        ExperimentConfig::new(p, spec, 0.3, shots, trials, seed)
    }

    #[test]
    fn single_outcome_at_the_mean() {
        let cfg = coherent_config(1, 1, 0);
        let d = cfg.distribution(cfg.phi_true).unwrap();
        let v = d.cov[(0, 0)];
        let ll = log_likelihood(&[vec![d.mean[0]]], cfg.phi_true, &cfg.state, &cfg.channel, &cfg.spec).unwrap();
        assert!((ll + 0.5 * (2.0 * std::f64::consts::PI * v).ln()).abs() < 1e-14);
    }

    #[test]
    fn sufficient_statistics_reproduce_direct_sum() {
        let p = StateParams::new(0.7, 0.4, 0.5, 1.1, 0.3).unwrap();
        let spec = MeasurementSpec::general_dyne(0.6, 0.9).unwrap();
        let cfg = ExperimentConfig::new(p, spec, 0.2, 50, 1, 3);
        let ys = sample_outcomes(&cfg.distribution(0.2).unwrap(), 50, 9).unwrap();
        let flat: Vec<f64> = ys.iter().flatten().copied().collect();
        let stats = SampleStats::from_flat(&flat, 2);
        for phi in [0.0, 0.2, 0.45] {
            let direct = log_likelihood(&ys, phi, &p, &cfg.channel, &spec).unwrap();
            let fast = stats.log_likelihood(&cfg.distribution(phi).unwrap()).unwrap();
            assert!((direct - fast).abs() < 1e-9 * direct.abs());
        }
        let mut rev = ys.clone();
        rev.reverse();
        let a = log_likelihood(&ys, 0.1, &p, &cfg.channel, &spec).unwrap();
        let b = log_likelihood(&rev, 0.1, &p, &cfg.channel, &spec).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs());
    }

    #[test]
    fn noiseless_limit_recovers_truth() {
        let cfg = coherent_config(10, 1, 0);
        let sharp = |phi: f64| -> Result<OutcomeDistribution> {
            let mut d = cfg.distribution(phi)?;
            d.cov *= 1e-8;
            Ok(d)
        };
        let truth = sharp(cfg.phi_true).unwrap();
        let mut flat = Vec::new();
        truth.sample_into(&mut stream_rng(1, 0), 10, &mut flat);
        let est = maximize(&SampleStats::from_flat(&flat, 1), sharp, cfg.phi_true, 0.5).unwrap();
        assert!((est.phi - cfg.phi_true).abs() < 1e-6);
        assert!(!est.boundary_hit);
    }

    #[test]
    fn deterministic_and_equivariant() {
        let a = run_experiment(&coherent_config(200, 40, 11)).unwrap();
        let b = run_experiment(&coherent_config(200, 40, 11)).unwrap();
        assert_eq!(a, b);
        let mut shifted = coherent_config(200, 40, 11);
        let delta = 0.17;
        shifted.phi_true += delta;
        shifted.spec = MeasurementSpec::homodyne(shifted.spec.psi() - 2.0 * delta).unwrap();
        let c = run_experiment(&shifted).unwrap();
        for (x, y) in a.estimates.iter().zip(&c.estimates) {
            assert!((y - x - delta).abs() < 1e-7, "{x} {y}");
        }
    }

    #[test]
    fn coherent_state_near_bound() {
        let rep = run_experiment(&coherent_config(1000, 300, 5)).unwrap();
        assert!((rep.fi_used - 4.0).abs() < 1e-12);
        assert!(rep.saturation_ratio > 0.75 && rep.saturation_ratio < 1.3, "{}", rep.saturation_ratio);
        assert!(rep.bias.abs() < 3.0 * (rep.mse / rep.trials as f64).sqrt());
        assert_eq!(rep.boundary_hits, 0);
    }

    #[test]
    fn invalid_configs() {
        let mut c = coherent_config(0, 1, 0);
        assert!(run_experiment(&c).is_err());
        c.shots = 1;
        c.search_halfwidth = 2.0;
        assert!(run_experiment(&c).is_err());
    }
}
