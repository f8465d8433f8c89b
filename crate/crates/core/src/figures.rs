//! Plot-ready datasets for the displaced-thermal, squeezed-thermal and
//! region-map figures.
//!
//! Every table carries a `series` column where it mixes kinds of rows:
//! `0` is the background grid (or bounding curve), `1..=4` are the lossy
//! trajectories (i)–(iv), and `10 + k` are curves at a fixed parameter.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fisher::{
    alpha_tilde_max_ii, alpha_tilde_max_ii_iii, alpha_tilde_max_iii, c_f_type_i, c_f_type_ii, c_h,
    classify_optimal_type, dts_fi_max, qfi, sts_fi_type_i, sts_fi_type_ii, OptimalType,
};
use crate::state::{apply_thermal_channel, ChannelParams, StateParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FigureName {
    Fig3a,
    Fig3b,
    Fig4,
    Fig5a,
    Fig5b,
    Fig6,
}

impl FigureName {
    pub const ALL: [FigureName; 6] =
        [FigureName::Fig3a, FigureName::Fig3b, FigureName::Fig4, FigureName::Fig5a, FigureName::Fig5b, FigureName::Fig6];

    pub fn as_str(&self) -> &'static str {
        match self {
            FigureName::Fig3a => "fig3a",
            FigureName::Fig3b => "fig3b",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5a => "fig5a",
            FigureName::Fig5b => "fig5b",
            FigureName::Fig6 => "fig6",
        }
    }
}

impl std::str::FromStr for FigureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureName::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown figure '{s}'")))
    }
}

/// Inclusive uniform axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) || points == 0 || (points == 1 && lo != hi) {
            return Err(Error::InvalidParameter(format!("bad axis [{lo}, {hi}] with {points} points")));
        }
        Ok(Self { lo, hi, points })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.lo + step * i as f64).collect()
    }
}

/// Grid of a figure: `x` is the horizontal variable (|α|², sinh²r, α̃² or
/// unused), `n_th` the thermal occupation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigureGrid {
    pub x: Axis,
    pub n_th: Axis,
}

impl FigureGrid {
    pub fn default_for(name: FigureName) -> Self {
        let ax = |lo, hi, n| Axis { lo, hi, points: n };
        match name {
            FigureName::Fig3a => Self { x: ax(0.0, 2.0, 41), n_th: ax(0.0, 2.0, 41) },
            FigureName::Fig3b => Self { x: ax(0.0, 4.0, 5), n_th: ax(0.0, 3.0, 61) },
            FigureName::Fig4 => Self { x: ax(0.0, 0.0, 1), n_th: ax(0.0, 3.0, 301) },
            FigureName::Fig5a => Self { x: ax(0.0, 2.0, 41), n_th: ax(0.0, 3.0, 61) },
            FigureName::Fig5b => Self { x: ax(0.0, 2.0, 5), n_th: ax(0.0, 3.0, 61) },
            FigureName::Fig6 => Self { x: ax(0.0, 6.0, 61), n_th: ax(0.0, 1.2, 61) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// Transmissions at which the trajectories are sampled.
pub const TRAJECTORY_ETAS: [f64; 5] = [1.0, 0.8, 0.6, 0.4, 0.2];

/// Displaced thermal input `|α|² = 1`, `n_th = 1` (`N = 2`), environments
/// `n_e ∈ {N+2, N, n_th, n_th−1}`.
pub fn dts_trajectory_inputs() -> (StateParams, [f64; 4]) {
    (StateParams::displaced_thermal(1.0, 0.0, 1.0).expect("valid"), [4.0, 2.0, 1.0, 0.0])
}

/// Squeezed thermal input `sinh²r = 1`, `n_th = 2` (`N = 7`), environments
/// `n_e ∈ {N+7, N, n_th, n_th−1}`.
pub fn sts_trajectory_inputs() -> (StateParams, [f64; 4]) {
    (StateParams::squeezed_thermal(1f64.asinh(), 0.0, 2.0).expect("valid"), [14.0, 7.0, 2.0, 1.0])
}

/// Best Gaussian FI of a squeezed thermal state and the type index (1 for
/// homodyne, 2 for the `s = r` general-dyne), following the figure labels.
pub fn sts_optimal_fi(r: f64, n_th: f64) -> (f64, u8) {
    let (f1, f2) = (sts_fi_type_i(r, n_th), sts_fi_type_ii(r, n_th));
    if f1 >= f2 {
        (f1, 1)
    } else {
        (f2, 2)
    }
}

fn dts_row(series: f64, eta: f64, p: &StateParams) -> Vec<f64> {
    let a2 = p.alpha_mag().powi(2);
    let f = dts_fi_max(p.alpha_mag(), p.n_th());
    vec![series, eta, a2, p.n_th(), a2 + p.n_th(), f, qfi(p), f.sqrt().recip()]
}

fn sts_row(series: f64, eta: f64, p: &StateParams) -> Vec<f64> {
    let (r, n) = (p.r(), p.n_th());
    let (f, t) = sts_optimal_fi(r, n);
    let n_total = r.sinh().powi(2) * (2.0 * n + 1.0) + n;
    vec![series, eta, r.sinh().powi(2), n, n_total, f, qfi(p), f.sqrt().recip(), f64::from(t)]
}

fn trajectories(input: StateParams, envs: [f64; 4], row: fn(f64, f64, &StateParams) -> Vec<f64>) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (k, n_e) in envs.into_iter().enumerate() {
        for eta in TRAJECTORY_ETAS {
            let out = apply_thermal_channel(&input, &ChannelParams::new(eta, n_e)?);
            rows.push(row((k + 1) as f64, eta, &out));
        }
    }
    Ok(rows)
}

const DTS_COLUMNS: [&str; 8] = ["series", "eta", "alpha_sq", "n_th", "N", "fi", "qfi", "delta_phi"];
const STS_COLUMNS: [&str; 9] = ["series", "eta", "sinh2_r", "n_th", "N", "fi", "qfi", "delta_phi", "type"];

pub fn figure(name: FigureName, grid: &FigureGrid) -> Result<Table> {
    let xs = grid.x.values();
    let ns = grid.n_th.values();
    let pairs: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ns.iter().map(move |&n| (x, n))).collect();
    match name {
        FigureName::Fig3a | FigureName::Fig3b => {
            let mut rows: Vec<Vec<f64>> = pairs
                .par_iter()
                .map(|&(a2, n)| {
                    let p = StateParams::displaced_thermal(a2.max(0.0).sqrt(), 0.0, n)?;
                    let series = if name == FigureName::Fig3a { 0.0 } else { 10.0 + xs.iter().position(|&x| x == a2).unwrap_or(0) as f64 };
                    Ok(dts_row(series, 1.0, &p))
                })
                .collect::<Result<_>>()?;
            if name == FigureName::Fig3b {
                // coherent states bound the error from below at fixed N
                for &n_total in &ns {
                    rows.push(dts_row(0.0, 1.0, &StateParams::displaced_thermal(n_total.sqrt(), 0.0, 0.0)?));
                }
            }
            let (input, envs) = dts_trajectory_inputs();
            rows.extend(trajectories(input, envs, dts_row)?);
            Ok(Table { columns: DTS_COLUMNS.to_vec(), rows })
        }
        FigureName::Fig5a | FigureName::Fig5b => {
            let mut rows: Vec<Vec<f64>> = pairs
                .par_iter()
                .map(|&(sh2, n)| {
                    let p = StateParams::squeezed_thermal(sh2.max(0.0).sqrt().asinh(), 0.0, n)?;
                    let series = if name == FigureName::Fig5a { 0.0 } else { 10.0 + xs.iter().position(|&x| x == sh2).unwrap_or(0) as f64 };
                    Ok(sts_row(series, 1.0, &p))
                })
                .collect::<Result<_>>()?;
            if name == FigureName::Fig5b {
                // squeezed vacuum bounds the error from below at fixed N
                for &n_total in &ns {
                    rows.push(sts_row(0.0, 1.0, &StateParams::squeezed_thermal(n_total.sqrt().asinh(), 0.0, 0.0)?));
                }
            }
            let (input, envs) = sts_trajectory_inputs();
            rows.extend(trajectories(input, envs, sts_row)?);
            Ok(Table { columns: STS_COLUMNS.to_vec(), rows })
        }
        FigureName::Fig4 => {
            let mut ns = ns;
            let nc = std::f64::consts::FRAC_1_SQRT_2;
            if grid.n_th.lo <= nc && nc <= grid.n_th.hi && !ns.contains(&nc) {
                ns.push(nc);
                ns.sort_by(f64::total_cmp);
            }
            let rows = ns.iter().map(|&n| vec![n, c_h(n), c_f_type_i(n), c_f_type_ii(n)]).collect();
            Ok(Table { columns: vec!["n_th", "C_H", "C_F_I", "C_F_II"], rows })
        }
        FigureName::Fig6 => {
            // the classification is independent of r at fixed |α̃|
            let r = 0.5f64;
            let scale = (-2.0 * r).exp() * (2.0 * r).sinh().powi(2);
            let rows = pairs
                .par_iter()
                .map(|&(at2, n)| {
                    let p = StateParams::canonical((at2.max(0.0) * scale).sqrt(), r, 0.0, n)?;
                    let region: u32 = classify_optimal_type(&p)
                        .into_iter()
                        .map(|t| match t {
                            OptimalType::TypeI => 1,
                            OptimalType::TypeII => 2,
                            OptimalType::TypeIII => 4,
                        })
                        .sum();
                    Ok(vec![
                        n,
                        at2,
                        f64::from(region),
                        alpha_tilde_max_ii(n).powi(2),
                        alpha_tilde_max_iii(n).powi(2),
                        alpha_tilde_max_ii_iii(n).map_or(f64::NAN, |v| v * v),
                    ])
                })
                .collect::<Result<_>>()?;
            Ok(Table {
                columns: vec!["n_th", "alpha_tilde_sq", "region", "a2_max_ii", "a2_max_iii", "a2_max_ii_iii"],
                rows,
            })
        }
    }
}
