//! Backward adjoint integration along an extremal.
//!
//! With `M = sum_i mu_i` the adjoints obey `mu_i' = -M L_{z_i}` and
//! `p_k' = -M L_{q_k}`, with `mu_i(t1) = 1` and `p_k(t1) = -M(t1) L_{v_k}(t1)`.
//! They are integrated in reversed time `s = t1 - t` against a cubic Hermite
//! interpolant of the forward samples.

use serde::Serialize;

use super::samples::sample_derivative;
use super::solver::{integrate_ode, StepStats};
use super::{herglotz_along, write_row, IntegratorConfig, Method, Sampling, Trajectory};
use crate::lagrangian::LagrangianSystem;
use crate::report::CheckResult;
use crate::{Error, Result};

/// Largest normalized Herglotz residual accepted for a forward curve.
pub const EXTREMAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PontryaginRun {
    pub forward: Trajectory,
    /// `mu[i]` holds `mu_1..mu_q` at forward sample `i`.
    pub mu: Vec<Vec<f64>>,
    /// `p[i]` holds `p_1..p_n` at forward sample `i`.
    pub p: Vec<Vec<f64>>,
    pub m: Vec<f64>,
    /// Terminal values used to start the backward pass.
    pub mu_final: Vec<f64>,
    pub p_final: Vec<f64>,
    pub adjoint_stats: StepStats,
}

impl PontryaginRun {
    /// CSV with header `t,q..,v..,z..,mu1..,p1..,M`.
    pub fn to_csv(&self) -> String {
        let dims = self.forward.dims;
        let mut header = vec!["t".to_string()];
        header.extend(dims.coordinate_names());
        header.extend((1..=dims.qcount).map(|i| format!("mu{i}")));
        header.extend((1..=dims.n).map(|k| format!("p{k}")));
        header.push("M".into());
        let mut out = header.join(",");
        out.push('\n');
        for i in 0..self.forward.len() {
            let mut row = vec![self.forward.times[i]];
            row.extend_from_slice(&self.forward.states[i]);
            row.extend_from_slice(&self.mu[i]);
            row.extend_from_slice(&self.p[i]);
            row.push(self.m[i]);
            write_row(&mut out, &row);
        }
        out
    }
}

/// Checks that `extremal` solves the Herglotz equations, then integrates the
/// adjoints backward along it.
pub fn integrate_pontryagin(l: &LagrangianSystem, extremal: &Trajectory, method: Method) -> Result<PontryaginRun> {
    let series = herglotz_along(extremal, l)?;
    if !(series.max_normalized <= EXTREMAL_TOLERANCE) {
        return Err(Error::NotAnExtremal {
            max_residual: series.max_normalized,
        });
    }
    integrate_adjoints(l, extremal, method)
}

/// The backward pass alone, without the extremal check.
pub fn integrate_adjoints(l: &LagrangianSystem, forward: &Trajectory, method: Method) -> Result<PontryaginRun> {
    let dims = l.dims();
    if forward.dims != dims {
        return Err(Error::DimensionMismatch {
            expected: dims.dim(),
            got: forward.dims.dim(),
        });
    }
    if forward.len() < 2 {
        return Err(Error::Model("forward trajectory needs at least two samples".into()));
    }
    let (q, n) = (dims.qcount, dims.n);
    let t0 = forward.times[0];
    let t1 = *forward.times.last().unwrap();
    let derivs = forward.state_derivatives()?;

    let x1 = forward.final_state();
    let b1 = l.blocks(x1)?;
    let m1 = q as f64;
    let mu_final = vec![1.0; q];
    let p_final: Vec<f64> = (0..n).map(|k| -m1 * b1.lv(dims, k)).collect();
    let mut y0 = mu_final.clone();
    y0.extend_from_slice(&p_final);

    let s_times: Vec<f64> = forward.times.iter().rev().map(|t| t1 - t).collect();
    let config = IntegratorConfig::new(method, 0.0, t1 - t0).with_sampling(Sampling::At(s_times[1..].to_vec()));
    let sol = integrate_ode(
        |s, y| {
            let x = forward.interpolate_with(t1 - s, &derivs)?;
            let b = l.blocks(&x)?;
            let m: f64 = y[..q].iter().sum();
            let mut d = Vec::with_capacity(q + n);
            d.extend((0..q).map(|i| m * b.lz(dims, i)));
            d.extend((0..n).map(|k| m * b.lq(dims, k)));
            Ok(d)
        },
        &y0,
        &config,
    )?;
    if sol.states.len() != forward.len() {
        return Err(Error::Model(format!(
            "adjoint pass produced {} samples for {} forward samples",
            sol.states.len(),
            forward.len()
        )));
    }
    let mut mu = Vec::with_capacity(forward.len());
    let mut p = Vec::with_capacity(forward.len());
    let mut m = Vec::with_capacity(forward.len());
    for y in sol.states.iter().rev() {
        mu.push(y[..q].to_vec());
        p.push(y[q..].to_vec());
        m.push(y[..q].iter().sum());
    }
    Ok(PontryaginRun {
        forward: forward.clone(),
        mu,
        p,
        m,
        mu_final,
        p_final,
        adjoint_stats: sol.stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    /// `|p_k + M L_{v_k}| / (1 + |M L_{v_k}|)`.
    pub stationarity: CheckResult,
    /// `|M' + M sum_i L_{z_i}| / (1 + |M sum_i L_{z_i}|)`, `M'` by differences.
    pub m_law: CheckResult,
    /// `max_i |mu_i(t1) - 1|`, required to vanish exactly.
    pub transversality: CheckResult,
}

impl StationarityReport {
    pub fn pass(&self) -> bool {
        self.stationarity.pass && self.m_law.pass && self.transversality.pass
    }

    pub fn checks(&self) -> Vec<CheckResult> {
        vec![
            self.stationarity.clone(),
            self.m_law.clone(),
            self.transversality.clone(),
        ]
    }
}

pub fn verify_stationarity(run: &PontryaginRun, l: &LagrangianSystem, tol: f64) -> Result<StationarityReport> {
    let dims = l.dims();
    let md = sample_derivative(&run.forward.times, &run.m)?;
    let mut stat = Vec::with_capacity(run.m.len());
    let mut law = Vec::with_capacity(run.m.len());
    for (i, x) in run.forward.states.iter().enumerate() {
        let b = l.blocks(x)?;
        let m = run.m[i];
        stat.push(
            (0..dims.n)
                .map(|k| {
                    let target = m * b.lv(dims, k);
                    (run.p[i][k] + target).abs() / (1.0 + target.abs())
                })
                .fold(0.0, f64::max),
        );
        let drive = m * b.lz_sum(dims);
        law.push((md[i] + drive).abs() / (1.0 + drive.abs()));
    }
    let last = run.mu.last().expect("run has samples");
    let transversality = last.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    Ok(StationarityReport {
        stationarity: CheckResult::from_samples("pontryagin-stationarity", stat, tol),
        m_law: CheckResult::from_samples("pontryagin-m-law", law, tol),
        transversality: CheckResult::new("pontryagin-transversality", transversality, 0.0),
    })
}
