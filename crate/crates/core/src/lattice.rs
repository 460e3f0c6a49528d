//! Spin-dependent lin-angle-lin optical lattice. Energies in units with `hbar = 1`.
//!
//! The spin basis is `{|m=+1/2>, |m=-1/2>}` with `sigma_z = +1` on `m=+1/2`.

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    pub u1: f64,
    pub theta: f64,
    pub k_l: f64,
    pub b_parallel: f64,
    pub b_perp: f64,
    pub gyro: f64,
}

impl LatticeParams {
    pub fn new(u1: f64, theta: f64, k_l: f64, b_parallel: f64, b_perp: f64, gyro: f64) -> Result<Self> {
        if !(u1 > 0.0) || !(k_l > 0.0) {
            return Err(Error::InvalidParameter(format!("need u1 > 0 and k_l > 0, got u1={u1}, k_l={k_l}")));
        }
        Ok(Self { u1, theta, k_l, b_parallel, b_perp, gyro })
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeDerived {
    /// Peak-peak modulation depth.
    pub u_p: f64,
    /// `k_L dz`, continuous in theta.
    pub k_dz: f64,
    /// Well separation `dz`.
    pub dz: f64,
}

/// `U(z)` as a real symmetric matrix in the `m = +-1/2` basis.
pub fn potential_matrix(z: f64, p: &LatticeParams) -> Matrix2<f64> {
    potential_at_phase(2.0 * p.k_l * z, p)
}

/// `U` at `z' = 2 k_L z`.
pub fn potential_at_phase(zp: f64, p: &LatticeParams) -> Matrix2<f64> {
    let pre = -2.0 * p.u1 / 3.0;
    let scalar = pre * 2.0 * (1.0 + p.theta.cos() * zp.cos());
    let sz = pre * p.theta.sin() * zp.sin() - 0.5 * p.gyro * p.b_parallel;
    let sx = -0.5 * p.gyro * p.b_perp;
    Matrix2::new(scalar + sz, sx, sx, scalar - sz)
}

/// Eigenvalues `(lower, upper)` of a real symmetric 2x2 matrix.
pub fn bands(m: &Matrix2<f64>) -> (f64, f64) {
    let mean = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let half = (m[(0, 0)] - m[(1, 1)]) / 2.0;
    let r = half.hypot(m[(0, 1)]);
    (mean - r, mean + r)
}

/// `wrap(x)` into `(-pi, pi]`.
fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// `k_L dz = atan(tan(theta)/2)` on the branch continuous through `theta = pi/2 + k pi`.
pub fn well_phase(theta: f64) -> f64 {
    theta + wrap(theta.sin().atan2(2.0 * theta.cos()) - theta)
}

pub fn derived_geometry(p: &LatticeParams) -> LatticeDerived {
    let u_p = 4.0 / 3.0 * p.u1 * (3.0 * p.theta.cos().powi(2) + 1.0).sqrt();
    let k_dz = well_phase(p.theta);
    LatticeDerived { u_p, k_dz, dz: k_dz / p.k_l }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityRow {
    pub theta: f64,
    pub z_prime: f64,
    pub band_lower: f64,
    pub band_upper: f64,
}

/// Adiabatic potentials on `theta_grid x z_prime_grid`, theta-major.
pub fn density_map(p: &LatticeParams, theta_grid: &[f64], z_prime_grid: &[f64]) -> Result<Vec<DensityRow>> {
    if theta_grid.is_empty() || z_prime_grid.is_empty() {
        return Err(Error::InvalidParameter("density map grids must be nonempty".into()));
    }
    Ok(theta_grid
        .par_iter()
        .flat_map_iter(|&theta| {
            let q = p.with_theta(theta);
            z_prime_grid.iter().map(move |&zp| {
                let (band_lower, band_upper) = bands(&potential_at_phase(zp, &q));
                DensityRow { theta, z_prime: zp, band_lower, band_upper }
            })
        })
        .collect())
}

/// `n` equally spaced `z'` samples over one period `[0, 2 pi)`.
pub fn period_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Peak-peak depth of the `m=+1/2` potential sampled on `n` points per period.
pub fn measured_peak_peak(p: &LatticeParams, n: usize) -> f64 {
    let values: Vec<f64> = period_grid(n).into_iter().map(|zp| potential_at_phase(zp, p)[(0, 0)]).collect();
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// Positions `z'` of strict local minima of the lower band over one period.
pub fn lower_band_minima(p: &LatticeParams, n: usize) -> Vec<f64> {
    let grid = period_grid(n);
    let v: Vec<f64> = grid.iter().map(|&zp| bands(&potential_at_phase(zp, p)).0).collect();
    (0..n)
        .filter(|&k| {
            let (l, r) = (v[(k + n - 1) % n], v[(k + 1) % n]);
            v[k] < l && v[k] <= r
        })
        .map(|k| grid[k])
        .collect()
}

/// Smallest band gap over a `z'` grid.
pub fn min_gap(p: &LatticeParams, z_prime_grid: &[f64]) -> f64 {
    z_prime_grid
        .iter()
        .map(|&zp| {
            let (lo, hi) = bands(&potential_at_phase(zp, p));
            hi - lo
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleReport {
    /// Largest `|dU_p/dt|`.
    pub max_rate: f64,
    pub threshold: f64,
    /// Interval start indices with `|dU_p/dt| > threshold`.
    pub violations: Vec<usize>,
    pub first_violation: Option<usize>,
    /// Largest `|d(dz)/dt|`.
    pub max_separation_speed: f64,
}

/// Forward-difference check of `|dU_p/dt| <= factor * gap` along a sampled schedule.
pub fn schedule_check(times: &[f64], thetas: &[f64], gap: f64, factor: f64, p: &LatticeParams) -> Result<ScheduleReport> {
    if times.len() != thetas.len() || times.len() < 2 {
        return Err(Error::ShapeMismatch("schedule needs matching time and theta samples, at least two".into()));
    }
    if !(gap > 0.0) || !(factor > 0.0) {
        return Err(Error::InvalidParameter("gap and threshold factor must be positive".into()));
    }
    let threshold = factor * gap;
    let geo: Vec<LatticeDerived> = thetas.iter().map(|&th| derived_geometry(&p.with_theta(th))).collect();
    let mut report = ScheduleReport { max_rate: 0.0, threshold, violations: Vec::new(), first_violation: None, max_separation_speed: 0.0 };
    for k in 0..times.len() - 1 {
        let dt = times[k + 1] - times[k];
        if !(dt > 0.0) {
            return Err(Error::NonMonotoneTime { index: k + 1 });
        }
        let rate = ((geo[k + 1].u_p - geo[k].u_p) / dt).abs();
        let speed = ((geo[k + 1].dz - geo[k].dz) / dt).abs();
        report.max_rate = report.max_rate.max(rate);
        report.max_separation_speed = report.max_separation_speed.max(speed);
        if rate > threshold {
            report.violations.push(k);
        }
    }
    report.first_violation = report.violations.first().copied();
    Ok(report)
}

/// `samples` points of `theta(t)` rising linearly from `theta0` to `theta1` over `[0, total]`.
pub fn linear_schedule(theta0: f64, theta1: f64, total: f64, samples: usize) -> (Vec<f64>, Vec<f64>) {
    let n = samples.max(2);
    (0..n)
        .map(|k| {
            let s = k as f64 / (n - 1) as f64;
            (s * total, theta0 + s * (theta1 - theta0))
        })
        .unzip()
}
