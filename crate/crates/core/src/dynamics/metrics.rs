use serde::Serialize;

use super::samples::sample_derivative;
use super::Trajectory;
use crate::lagrangian::LagrangianSystem;
use crate::{Error, Result};

/// Energy decay along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayMetrics {
    /// Least-squares slope of `ln E_L` against `t`.
    pub rate: f64,
    /// `E_L(t_end) / E_L(t_start)`.
    pub ratio: f64,
    pub energies: Vec<f64>,
    /// `dE/dt + E sum_i R_i(E_L)` per sample, `dE/dt` by differences.
    pub residuals: Vec<f64>,
    /// Largest `|residual| / (1 + |E sum_i R_i(E_L)|)`.
    pub max_relative_residual: f64,
}

pub fn decay_metrics(traj: &Trajectory, l: &LagrangianSystem) -> Result<DecayMetrics> {
    let energies = traj.states.iter().map(|x| l.energy(x)).collect::<Result<Vec<f64>>>()?;
    if let Some(i) = energies.iter().position(|e| !(*e > 0.0)) {
        return Err(Error::NonPositiveEnergy {
            t: traj.times[i],
            energy: energies[i],
        });
    }
    let logs: Vec<f64> = energies.iter().map(|e| e.ln()).collect();
    let rate = ls_slope(&traj.times, &logs);
    let de = sample_derivative(&traj.times, &energies)?;
    let mut residuals = Vec::with_capacity(energies.len());
    let mut max_rel: f64 = 0.0;
    for ((x, e), d) in traj.states.iter().zip(&energies).zip(de) {
        let grad = l.energy_gradient(x)?;
        let reeb = l.reeb_fields(x)?;
        let reeb_sum: f64 = reeb
            .row_iter()
            .map(|r| r.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>())
            .sum();
        let r = d + e * reeb_sum;
        max_rel = max_rel.max(r.abs() / (1.0 + (e * reeb_sum).abs()));
        residuals.push(r);
    }
    Ok(DecayMetrics {
        rate,
        ratio: energies.last().unwrap() / energies[0],
        energies,
        residuals,
        max_relative_residual: max_rel,
    })
}

fn ls_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let num: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let den: f64 = t.iter().map(|a| (a - tm).powi(2)).sum();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Herglotz residuals along a sampled curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HerglotzSeries {
    pub times: Vec<f64>,
    /// Raw residual vectors per sample.
    pub residuals: Vec<Vec<f64>>,
    /// Per sample, the largest component divided by its force scale.
    pub normalized: Vec<f64>,
    pub max_normalized: f64,
}

/// Evaluates the Herglotz residual at every sample, with accelerations
/// taken by five-point differences of the sampled velocities.
pub fn herglotz_along(traj: &Trajectory, l: &LagrangianSystem) -> Result<HerglotzSeries> {
    let dims = l.dims();
    if traj.dims != dims {
        return Err(Error::DimensionMismatch {
            expected: dims.dim(),
            got: traj.dims.dim(),
        });
    }
    let acc_cols = dims
        .v_range()
        .map(|s| sample_derivative(&traj.times, &traj.component(s)))
        .collect::<Result<Vec<_>>>()?;
    let mut residuals = Vec::with_capacity(traj.len());
    let mut normalized = Vec::with_capacity(traj.len());
    for (i, x) in traj.states.iter().enumerate() {
        let a: Vec<f64> = acc_cols.iter().map(|c| c[i]).collect();
        let (r, scale) = l.herglotz_terms(x, &a)?;
        normalized.push(r.iter().zip(&scale).map(|(ri, s)| ri.abs() / s).fold(0.0, f64::max));
        residuals.push(r);
    }
    let max_normalized = normalized.iter().copied().fold(0.0, f64::max);
    Ok(HerglotzSeries {
        times: traj.times.clone(),
        residuals,
        normalized,
        max_normalized,
    })
}
